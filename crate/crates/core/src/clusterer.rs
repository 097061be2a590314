//! The streaming clusterer.
//!
//! Each arriving record is compared against every cluster histogram. The
//! record joins the most similar cluster when that similarity is strictly
//! above the threshold, otherwise it opens a new cluster (or, once the
//! cluster cap is reached, joins the most similar cluster anyway). Absorbing
//! a record may trigger bucket-boundary pruning of that cluster only.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::borrow::Borrow;

use crate::error::{Error, Result};
use crate::lossy::{ClusterHistogram, LossyParams};
use crate::record::{AttributeKind, Record, Value};
use crate::similarity::matched_mass;
use crate::symbol::{Symbol, SymbolTable};

/// Token substituted for missing cells under [`MissingPolicy::AsValue`].
pub const MISSING_TOKEN: &str = "⟨MISSING⟩";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MissingPolicy {
    /// Missing cells are neither counted nor compared.
    Ignore,
    /// Missing cells become the categorical value [`MISSING_TOKEN`].
    #[default]
    AsValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClustererConfig {
    pub schema: Vec<AttributeKind>,
    pub epsilon: f64,
    pub support: f64,
    /// A record joins a cluster only if its similarity is strictly greater.
    pub sim_threshold: f64,
    pub max_clusters: Option<usize>,
    /// Equal-width bin size for numeric attributes.
    pub bin_width: Option<f64>,
    pub missing_policy: MissingPolicy,
    /// Exponent of the size-balancing weight; 0 disables it.
    pub balance_beta: f64,
}

impl ClustererConfig {
    /// Defaults: similarity threshold `m / 2`, no cluster cap, no balancing,
    /// missing cells kept as a value.
    pub fn new(schema: Vec<AttributeKind>, epsilon: f64, support: f64) -> Self {
        let sim_threshold = schema.len() as f64 / 2.0;
        ClustererConfig {
            schema,
            epsilon,
            support,
            sim_threshold,
            max_clusters: None,
            bin_width: None,
            missing_policy: MissingPolicy::default(),
            balance_beta: 0.0,
        }
    }

    /// All-categorical schema of `arity` attributes.
    pub fn categorical(arity: usize, epsilon: f64, support: f64) -> Self {
        Self::new(alloc::vec![AttributeKind::Categorical; arity], epsilon, support)
    }

    pub fn with_sim_threshold(mut self, st: f64) -> Self {
        self.sim_threshold = st;
        self
    }

    pub fn with_max_clusters(mut self, mc: Option<usize>) -> Self {
        self.max_clusters = mc;
        self
    }

    pub fn with_bin_width(mut self, width: Option<f64>) -> Self {
        self.bin_width = width;
        self
    }

    pub fn with_missing_policy(mut self, policy: MissingPolicy) -> Self {
        self.missing_policy = policy;
        self
    }

    pub fn with_balance_beta(mut self, beta: f64) -> Self {
        self.balance_beta = beta;
        self
    }

    pub fn arity(&self) -> usize {
        self.schema.len()
    }

    pub fn validate(&self) -> Result<LossyParams> {
        let params = LossyParams::new(self.epsilon, self.support)?;
        let m = self.arity() as f64;
        if !(self.sim_threshold >= 0.0 && self.sim_threshold <= m) {
            return Err(Error::Config(format!(
                "similarity threshold must lie in [0, {m}], got {}",
                self.sim_threshold
            )));
        }
        if self.max_clusters == Some(0) {
            return Err(Error::Config("max clusters must be positive".into()));
        }
        if !(self.balance_beta >= 0.0 && self.balance_beta.is_finite()) {
            return Err(Error::Config(format!(
                "balance beta must be a finite value >= 0, got {}",
                self.balance_beta
            )));
        }
        let has_numeric = self.schema.contains(&AttributeKind::Numeric);
        match self.bin_width {
            Some(w) if !(w > 0.0 && w.is_finite()) => {
                return Err(Error::Config(format!("bin width must be positive, got {w}")))
            }
            Some(_) if !has_numeric => {
                return Err(Error::Config("bin width given but no attribute is numeric".into()))
            }
            None if has_numeric => {
                return Err(Error::Config("numeric attributes need a bin width".into()))
            }
            _ => {}
        }
        Ok(params)
    }
}

/// Where one record went.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssignmentOutcome {
    pub record_index: u64,
    pub cluster_index: usize,
    pub created_new: bool,
    /// Raw similarity to the best-scoring existing cluster (0 for the first record).
    pub best_similarity: f64,
}

/// A record that could not be clustered.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("record {record_index} rejected: {error}")]
pub struct Rejection {
    pub record_index: u64,
    pub error: Error,
}

pub type StreamOutcome = core::result::Result<AssignmentOutcome, Rejection>;

/// Size-balancing selection score: `sim * (N / (k * N_i))^beta`.
pub fn selection_score(sim: f64, cluster_size: u64, total_seen: u64, cluster_count: usize, beta: f64) -> f64 {
    if beta == 0.0 {
        return sim;
    }
    let ratio = total_seen as f64 / (cluster_count as f64 * cluster_size as f64);
    sim * libm::pow(ratio, beta)
}

/// Live clustering state.
#[derive(Clone, Debug)]
pub struct ClusterModel {
    config: ClustererConfig,
    params: LossyParams,
    clusters: Vec<ClusterHistogram>,
    total_seen: u64,
    offered: u64,
    entries_pruned: u64,
    symbols: SymbolTable,
    bin_origins: Vec<Option<f64>>,
    missing_symbol: Option<Symbol>,
}

impl ClusterModel {
    pub fn new(config: ClustererConfig) -> Result<Self> {
        Self::with_symbols(config, SymbolTable::new())
    }

    /// Starts from an existing symbol table, for records interned elsewhere.
    pub fn with_symbols(config: ClustererConfig, symbols: SymbolTable) -> Result<Self> {
        let params = config.validate()?;
        let m = config.arity();
        Ok(ClusterModel {
            config,
            params,
            clusters: Vec::new(),
            total_seen: 0,
            offered: 0,
            entries_pruned: 0,
            symbols,
            bin_origins: alloc::vec![None; m],
            missing_symbol: None,
        })
    }

    pub fn config(&self) -> &ClustererConfig {
        &self.config
    }

    pub fn params(&self) -> &LossyParams {
        &self.params
    }

    pub fn clusters(&self) -> &[ClusterHistogram] {
        &self.clusters
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// `N`: records absorbed so far.
    pub fn total_seen(&self) -> u64 {
        self.total_seen
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn symbols_mut(&mut self) -> &mut SymbolTable {
        &mut self.symbols
    }

    pub fn bin_origins(&self) -> &[Option<f64>] {
        &self.bin_origins
    }

    pub fn entry_count(&self) -> usize {
        self.clusters.iter().map(ClusterHistogram::entry_count).sum()
    }

    /// Pruning passes summed over clusters.
    pub fn total_prunings(&self) -> u64 {
        self.clusters.iter().map(ClusterHistogram::prune_count).sum()
    }

    pub fn entries_pruned(&self) -> u64 {
        self.entries_pruned
    }

    /// Turns a raw record into interned tokens: numeric cells become
    /// `bin:<index>` of an equal-width grid anchored at the first value seen
    /// for that attribute; missing cells follow the configured policy.
    pub fn preprocess(&mut self, raw: &[Value]) -> Result<Record> {
        let m = self.config.arity();
        if raw.len() != m {
            return Err(Error::ArityMismatch {
                expected: m,
                found: raw.len(),
            });
        }
        // validate everything before touching bin origins
        for (index, (cell, kind)) in raw.iter().zip(&self.config.schema).enumerate() {
            match (cell, kind) {
                (Value::Numeric(v), AttributeKind::Numeric) => {
                    if !v.is_finite() {
                        return Err(Error::KindMismatch {
                            index,
                            reason: format!("non-finite numeric value {v}"),
                        });
                    }
                    if self.config.bin_width.is_none() {
                        return Err(Error::Config("numeric attributes need a bin width".into()));
                    }
                }
                (Value::Numeric(_), AttributeKind::Categorical) => {
                    return Err(Error::KindMismatch {
                        index,
                        reason: "numeric value in a categorical attribute".into(),
                    })
                }
                (Value::Categorical(t), AttributeKind::Numeric) => {
                    return Err(Error::KindMismatch {
                        index,
                        reason: format!("categorical value {t:?} in a numeric attribute"),
                    })
                }
                _ => {}
            }
        }
        let mut cells = Vec::with_capacity(m);
        for (index, cell) in raw.iter().enumerate() {
            let sym = match cell {
                Value::Categorical(t) => Some(self.symbols.intern(t)),
                Value::Numeric(v) => {
                    let width = self.config.bin_width.expect("checked above");
                    let origin = *self.bin_origins[index].get_or_insert(*v);
                    let bin = libm::floor((v - origin) / width) as i64;
                    Some(self.symbols.intern(&bin_token(bin)))
                }
                Value::Missing => match self.config.missing_policy {
                    MissingPolicy::Ignore => None,
                    MissingPolicy::AsValue => Some(self.missing_symbol()),
                },
            };
            cells.push(sym);
        }
        Ok(Record::new(cells))
    }

    fn missing_symbol(&mut self) -> Symbol {
        match self.missing_symbol {
            Some(s) => s,
            None => {
                let s = self.symbols.intern(MISSING_TOKEN);
                self.missing_symbol = Some(s);
                s
            }
        }
    }

    /// Clusters one preprocessed record.
    pub fn process_record(&mut self, record: &Record) -> StreamOutcome {
        let record_index = self.offered;
        self.offered += 1;
        self.assign(record, record_index)
            .map_err(|error| Rejection { record_index, error })
    }

    /// [`preprocess`](Self::preprocess) followed by [`process_record`](Self::process_record).
    pub fn ingest(&mut self, raw: &[Value]) -> StreamOutcome {
        match self.preprocess(raw) {
            Ok(record) => self.process_record(&record),
            Err(error) => {
                let record_index = self.offered;
                self.offered += 1;
                Err(Rejection { record_index, error })
            }
        }
    }

    pub fn process_all<R: Borrow<Record>>(&mut self, records: impl IntoIterator<Item = R>) -> Vec<StreamOutcome> {
        records
            .into_iter()
            .map(|r| self.process_record(r.borrow()))
            .collect()
    }

    fn assign(&mut self, record: &Record, record_index: u64) -> Result<AssignmentOutcome> {
        let m = self.config.arity();
        if record.arity() != m {
            return Err(Error::ArityMismatch {
                expected: m,
                found: record.arity(),
            });
        }
        if self.clusters.is_empty() {
            self.open_cluster(record)?;
            return Ok(AssignmentOutcome {
                record_index,
                cluster_index: 0,
                created_new: true,
                best_similarity: 0.0,
            });
        }

        let (best, best_sim) = self.best_cluster(record);
        let join = best_sim > self.config.sim_threshold
            || self.config.max_clusters.is_some_and(|mc| self.clusters.len() >= mc);
        let (cluster_index, created_new) = if join {
            let pruned = self.clusters[best].absorb(record, &self.params)?;
            self.entries_pruned += pruned as u64;
            self.total_seen += 1;
            (best, false)
        } else {
            (self.open_cluster(record)?, true)
        };
        Ok(AssignmentOutcome {
            record_index,
            cluster_index,
            created_new,
            best_similarity: best_sim,
        })
    }

    /// Index and raw similarity of the cluster with the highest selection
    /// score; ties go to the lowest index.
    fn best_cluster(&self, record: &Record) -> (usize, f64) {
        let k = self.clusters.len();
        let beta = self.config.balance_beta;
        let mut best = (0, f64::NEG_INFINITY, 0.0);
        for (i, cluster) in self.clusters.iter().enumerate() {
            let size = cluster.size();
            let threshold = self.params.qualifying_threshold(size);
            let sim = matched_mass(cluster, record, threshold) as f64 / size as f64;
            let score = selection_score(sim, size, self.total_seen, k, beta);
            if score > best.1 {
                best = (i, score, sim);
            }
        }
        (best.0, best.2)
    }

    fn open_cluster(&mut self, record: &Record) -> Result<usize> {
        let mut cluster = ClusterHistogram::new(self.config.arity());
        let pruned = cluster.absorb(record, &self.params)?;
        self.entries_pruned += pruned as u64;
        self.clusters.push(cluster);
        self.total_seen += 1;
        Ok(self.clusters.len() - 1)
    }

    /// Deep copy of the current state; later updates do not affect it.
    pub fn snapshot(&self) -> ModelSnapshot {
        ModelSnapshot {
            config: self.config.clone(),
            params: self.params,
            clusters: self.clusters.clone(),
            total_seen: self.total_seen,
            symbols: self.symbols.clone(),
        }
    }
}

fn bin_token(bin: i64) -> String {
    format!("bin:{bin}")
}

/// Immutable copy of a model's state.
#[derive(Clone, Debug)]
pub struct ModelSnapshot {
    config: ClustererConfig,
    params: LossyParams,
    clusters: Vec<ClusterHistogram>,
    total_seen: u64,
    symbols: SymbolTable,
}

impl ModelSnapshot {
    /// Reassembles a snapshot, e.g. from a model dump.
    pub fn from_parts(
        config: ClustererConfig,
        clusters: Vec<ClusterHistogram>,
        symbols: SymbolTable,
    ) -> Result<Self> {
        let params = config.validate()?;
        let m = config.arity();
        if let Some(c) = clusters.iter().find(|c| c.arity() != m) {
            return Err(Error::ArityMismatch {
                expected: m,
                found: c.arity(),
            });
        }
        let total_seen = clusters.iter().map(ClusterHistogram::size).sum();
        Ok(ModelSnapshot {
            config,
            params,
            clusters,
            total_seen,
            symbols,
        })
    }

    pub fn config(&self) -> &ClustererConfig {
        &self.config
    }

    pub fn params(&self) -> &LossyParams {
        &self.params
    }

    pub fn clusters(&self) -> &[ClusterHistogram] {
        &self.clusters
    }

    pub fn total_seen(&self) -> u64 {
        self.total_seen
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn entry_count(&self) -> usize {
        self.clusters.iter().map(ClusterHistogram::entry_count).sum()
    }

    pub fn total_prunings(&self) -> u64 {
        self.clusters.iter().map(ClusterHistogram::prune_count).sum()
    }
}

/// Clusters a raw stream in one pass. Per-record failures are reported in
/// the outcome list and the stream continues.
pub fn run_stream<R: AsRef<[Value]>>(
    config: ClustererConfig,
    records: impl IntoIterator<Item = R>,
) -> Result<(ClusterModel, Vec<StreamOutcome>)> {
    let mut model = ClusterModel::new(config)?;
    let outcomes = records.into_iter().map(|r| model.ingest(r.as_ref())).collect();
    Ok((model, outcomes))
}

/// Like [`run_stream`] for records already interned in `symbols`.
pub fn run_preprocessed<R: Borrow<Record>>(
    config: ClustererConfig,
    symbols: SymbolTable,
    records: impl IntoIterator<Item = R>,
) -> Result<(ClusterModel, Vec<StreamOutcome>)> {
    let mut model = ClusterModel::with_symbols(config, symbols)?;
    let outcomes = model.process_all(records);
    Ok((model, outcomes))
}
