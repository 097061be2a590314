//! Parameter sweeps over a labeled dataset.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use streamclucd_core::baselines::{chunked_kmodes_stream, kmodes_fit, squeezer_run};
use streamclucd_core::evaluation::{accuracy, Quality};
use streamclucd_core::{run_preprocessed, ClustererConfig, StreamOutcome};

use crate::dataset::LabeledData;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Streamclucd,
    Squeezer,
    Kmodes,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Streamclucd => "streamclucd",
            Algorithm::Squeezer => "squeezer",
            Algorithm::Kmodes => "kmodes",
        }
    }
}

fn all_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Streamclucd, Algorithm::Squeezer, Algorithm::Kmodes]
}

fn default_max_iter() -> usize {
    100
}

/// Grid file contents. Every StreamCluCD point is the product
/// `sim_threshold × epsilon × support`; Squeezer and k-modes vary only
/// `sim_threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default = "all_algorithms")]
    pub algorithms: Vec<Algorithm>,
    pub sim_threshold: Vec<f64>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub support: Vec<f64>,
    #[serde(default)]
    pub max_clusters: Option<usize>,
    #[serde(default)]
    pub balance_beta: f64,
    #[serde(default = "default_max_iter")]
    pub kmodes_max_iter: usize,
    /// Chunked streaming k-modes when set, batch k-modes otherwise.
    #[serde(default)]
    pub kmodes_chunk_size: Option<usize>,
}

impl Grid {
    pub fn point_count(&self) -> usize {
        let st = self.sim_threshold.len();
        self.algorithms
            .iter()
            .map(|a| match a {
                Algorithm::Streamclucd => st * self.epsilon.len() * self.support.len(),
                _ => st,
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: String,
    pub sim_threshold: f64,
    pub epsilon: Option<f64>,
    pub support: Option<f64>,
    pub k_requested: Option<usize>,
    pub clusters: usize,
    pub n: u64,
    pub accuracy: Option<f64>,
    pub error: Option<f64>,
    pub absolute_error: Option<f64>,
    pub total_entries: usize,
    pub prunings: u64,
    pub elapsed_ms: f64,
    pub warning: Option<String>,
    pub failure: Option<String>,
}

impl SweepRow {
    fn new(algorithm: Algorithm, sim_threshold: f64) -> Self {
        SweepRow {
            algorithm: algorithm.name().to_string(),
            sim_threshold,
            epsilon: None,
            support: None,
            k_requested: None,
            clusters: 0,
            n: 0,
            accuracy: None,
            error: None,
            absolute_error: None,
            total_entries: 0,
            prunings: 0,
            elapsed_ms: 0.0,
            warning: None,
            failure: None,
        }
    }

    fn set_quality(&mut self, q: Option<Quality<String>>) {
        if let Some(q) = q {
            self.accuracy = Some(q.accuracy);
            self.error = Some(q.error);
            self.absolute_error = Some(q.absolute_error);
        }
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn assignments_of(outcomes: &[StreamOutcome]) -> Result<Vec<usize>, String> {
    outcomes
        .iter()
        .map(|o| o.as_ref().map(|a| a.cluster_index).map_err(|r| r.to_string()))
        .collect()
}

fn quality(data: &LabeledData, assignments: &[usize]) -> Result<Option<Quality<String>>, String> {
    if !data.has_labels() {
        return Ok(None);
    }
    accuracy(assignments, &data.labels).map(Some).map_err(|e| e.to_string())
}

/// Runs every grid point in order: per similarity threshold, Squeezer, then
/// StreamCluCD for each `(epsilon, support)`, then k-modes with the
/// Squeezer cluster count. Failures are recorded in the row.
pub fn run_sweep(grid: &Grid, data: &LabeledData) -> anyhow::Result<Vec<SweepRow>> {
    if grid.point_count() == 0 {
        anyhow::bail!("grid has no points");
    }
    let wants = |a| grid.algorithms.contains(&a);
    let mut rows = Vec::new();
    for &st in &grid.sim_threshold {
        let mut squeezer_k = None;
        if wants(Algorithm::Squeezer) || wants(Algorithm::Kmodes) {
            let row = squeezer_point(st, data);
            squeezer_k = row.failure.is_none().then_some(row.clusters);
            if wants(Algorithm::Squeezer) {
                rows.push(row);
            }
        }
        if wants(Algorithm::Streamclucd) {
            for &eps in &grid.epsilon {
                for &s in &grid.support {
                    rows.push(streamclucd_point(grid, st, eps, s, data));
                }
            }
        }
        if wants(Algorithm::Kmodes) {
            rows.push(kmodes_point(grid, st, squeezer_k, data));
        }
    }
    Ok(rows)
}

fn streamclucd_point(grid: &Grid, st: f64, eps: f64, s: f64, data: &LabeledData) -> SweepRow {
    let mut row = SweepRow::new(Algorithm::Streamclucd, st);
    row.epsilon = Some(eps);
    row.support = Some(s);
    let config = ClustererConfig::new(data.schema.kinds.clone(), eps, s)
        .with_sim_threshold(st)
        .with_max_clusters(grid.max_clusters)
        .with_balance_beta(grid.balance_beta)
        .with_bin_width(None);
    let start = Instant::now();
    let run = run_preprocessed(config, data.symbols.clone(), &data.records);
    row.elapsed_ms = ms(start);
    let result = run.map_err(|e| e.to_string()).and_then(|(model, outcomes)| {
        row.clusters = model.cluster_count();
        row.n = model.total_seen();
        row.total_entries = model.entry_count();
        row.prunings = model.total_prunings();
        let assignments = assignments_of(&outcomes)?;
        quality(data, &assignments)
    });
    match result {
        Ok(q) => row.set_quality(q),
        Err(e) => row.failure = Some(e),
    }
    row
}

fn squeezer_point(st: f64, data: &LabeledData) -> SweepRow {
    let mut row = SweepRow::new(Algorithm::Squeezer, st);
    let start = Instant::now();
    let (model, outcomes) = squeezer_run(st, &data.records);
    row.elapsed_ms = ms(start);
    row.clusters = model.cluster_count();
    row.n = model.total_seen();
    row.total_entries = model.entry_count();
    match assignments_of(&outcomes).and_then(|a| quality(data, &a)) {
        Ok(q) => row.set_quality(q),
        Err(e) => row.failure = Some(e),
    }
    row
}

fn kmodes_point(grid: &Grid, st: f64, squeezer_k: Option<usize>, data: &LabeledData) -> SweepRow {
    let mut row = SweepRow::new(Algorithm::Kmodes, st);
    let Some(mut k) = squeezer_k else {
        row.failure = Some("paired Squeezer run failed".into());
        return row;
    };
    let distinct = data.distinct_records();
    if k > distinct {
        row.warning = Some(format!("k capped from {k} to {distinct} distinct records"));
        k = distinct;
    }
    row.k_requested = Some(k);
    let start = Instant::now();
    let fit = match grid.kmodes_chunk_size {
        Some(chunk) => chunked_kmodes_stream(&data.records, k, chunk, grid.kmodes_max_iter, &data.symbols),
        None => kmodes_fit(&data.records, k, grid.kmodes_max_iter, &data.symbols),
    };
    row.elapsed_ms = ms(start);
    match fit {
        Ok(fit) => {
            row.clusters = fit.modes.len();
            row.n = fit.assignments.len() as u64;
            match quality(data, &fit.assignments) {
                Ok(q) => row.set_quality(q),
                Err(e) => row.failure = Some(e),
            }
        }
        Err(e) => row.failure = Some(e.to_string()),
    }
    row
}

/// Mean clustering error of the rows matching `filter` that have one.
pub fn mean_error(rows: &[SweepRow], filter: impl Fn(&SweepRow) -> bool) -> Option<f64> {
    let errors: Vec<f64> = rows.iter().filter(|r| filter(r)).filter_map(|r| r.error).collect();
    (!errors.is_empty()).then(|| errors.iter().sum::<f64>() / errors.len() as f64)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], sink: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[SweepRow], path: &Path) -> anyhow::Result<()> {
    write_csv(rows, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use streamclucd_core::{Record, SymbolTable};

    use crate::schema::StreamSchema;

    fn toy() -> LabeledData {
        let mut symbols = SymbolTable::new();
        let rows = [["a", "b"], ["x", "y"], ["a", "b"], ["a", "c"], ["x", "y"], ["x", "z"]];
        let records = rows
            .iter()
            .map(|r| Record::from_tokens(&mut symbols, r.iter().map(|t| Some(*t))))
            .collect();
        let header: Vec<String> = vec!["p".into(), "q".into()];
        LabeledData {
            schema: StreamSchema::from_header(&header, None, &[], "?").unwrap(),
            records,
            labels: ["u", "v", "u", "u", "v", "v"].iter().map(|s| s.to_string()).collect(),
            symbols,
        }
    }

    fn grid() -> Grid {
        serde_json::from_str(r#"{"sim_threshold":[0.9],"epsilon":[0.1],"support":[0.0,0.5]}"#).unwrap()
    }

    #[test]
    fn one_point_per_combination() {
        let g = grid();
        assert_eq!(g.point_count(), 4);
        let rows = run_sweep(&g, &toy()).unwrap();
        let names: Vec<_> = rows.iter().map(|r| r.algorithm.as_str()).collect();
        assert_eq!(names, ["squeezer", "streamclucd", "streamclucd", "kmodes"]);
        for r in &rows {
            assert!(r.failure.is_none(), "{r:?}");
            assert_eq!(r.accuracy, Some(1.0));
            assert_eq!(r.clusters, 2);
        }
        assert_eq!(rows[3].k_requested, Some(2));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let mut g = grid();
        g.sim_threshold.clear();
        assert!(run_sweep(&g, &toy()).is_err());
    }

    #[test]
    fn bad_point_is_recorded_and_sweep_continues() {
        let mut g = grid();
        g.epsilon = vec![2.0, 0.1];
        g.support = vec![0.0];
        let rows = run_sweep(&g, &toy()).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[1].failure.as_deref().unwrap().contains("epsilon"));
        assert!(rows[2].failure.is_none());
    }

    #[test]
    fn kmodes_k_is_capped() {
        let mut g = grid();
        g.algorithms = vec![Algorithm::Kmodes];
        g.sim_threshold = vec![2.0];
        let rows = run_sweep(&g, &toy()).unwrap();
        // every record opens its own cluster at st = m, but only 4 are distinct
        assert_eq!(rows[0].k_requested, Some(4));
        assert!(rows[0].warning.is_some());
    }

    #[test]
    fn csv_export_has_header() {
        let rows = run_sweep(&grid(), &toy()).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("algorithm,sim_threshold,epsilon"));
        assert_eq!(text.lines().count(), 5);
    }
}
