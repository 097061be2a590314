//! Assignment CSV, summary JSON and model dump JSON.
//!
//! Floats go through `serde_json` / `ryu`, which print the shortest string
//! that parses back to the same `f64`.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use streamclucd_core::evaluation::Quality;
use streamclucd_core::lossy::{AttributeHistogram, ClusterHistogram, LossyEntry};
use streamclucd_core::{
    AttributeKind, ClustererConfig, MissingPolicy, ModelSnapshot, StreamOutcome, SymbolTable,
};

pub const ASSIGNMENT_HEADER: [&str; 4] = ["record_index", "cluster_index", "created_new", "best_similarity"];

/// Streams assignment rows as they are produced. Rejected records keep their
/// index and leave the other fields empty.
pub struct AssignmentWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> AssignmentWriter<W> {
    pub fn new(sink: W) -> Result<Self, csv::Error> {
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(ASSIGNMENT_HEADER)?;
        Ok(AssignmentWriter { inner })
    }

    pub fn write(&mut self, outcome: &StreamOutcome) -> Result<(), csv::Error> {
        match outcome {
            Ok(a) => self.inner.write_record([
                a.record_index.to_string(),
                a.cluster_index.to_string(),
                a.created_new.to_string(),
                a.best_similarity.to_string(),
            ]),
            Err(r) => self
                .inner
                .write_record([r.record_index.to_string(), String::new(), String::new(), String::new()]),
        }
    }

    /// Writes a row for an algorithm that only produces cluster indices.
    pub fn write_plain(&mut self, record_index: u64, cluster_index: usize) -> Result<(), csv::Error> {
        self.inner
            .write_record([record_index.to_string(), cluster_index.to_string(), String::new(), String::new()])
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| e.into_error())
    }
}

/// Reads an assignments CSV back as `(record_index, cluster_index)` pairs,
/// skipping rejected rows.
pub fn read_assignments(path: &Path) -> anyhow::Result<Vec<(u64, usize)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let cluster = row.get(1).unwrap_or("");
        if cluster.is_empty() {
            continue;
        }
        let index: u64 = row.get(0).unwrap_or("").parse()?;
        out.push((index, cluster.parse()?));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeEcho {
    pub name: String,
    pub kind: String,
}

/// Serializable mirror of [`ClustererConfig`] with attribute names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub attributes: Vec<AttributeEcho>,
    pub epsilon: f64,
    pub support: f64,
    pub sim_threshold: f64,
    pub max_clusters: Option<usize>,
    pub bin_width: Option<f64>,
    pub missing_policy: String,
    pub balance_beta: f64,
}

fn kind_name(kind: AttributeKind) -> &'static str {
    match kind {
        AttributeKind::Categorical => "categorical",
        AttributeKind::Numeric => "numeric",
    }
}

pub fn policy_name(policy: MissingPolicy) -> &'static str {
    match policy {
        MissingPolicy::Ignore => "ignore",
        MissingPolicy::AsValue => "value",
    }
}

pub fn parse_policy(s: &str) -> Option<MissingPolicy> {
    match s {
        "ignore" => Some(MissingPolicy::Ignore),
        "value" => Some(MissingPolicy::AsValue),
        _ => None,
    }
}

impl ConfigEcho {
    pub fn new(config: &ClustererConfig, names: &[String]) -> Self {
        ConfigEcho {
            attributes: names
                .iter()
                .zip(&config.schema)
                .map(|(n, k)| AttributeEcho {
                    name: n.clone(),
                    kind: kind_name(*k).to_string(),
                })
                .collect(),
            epsilon: config.epsilon,
            support: config.support,
            sim_threshold: config.sim_threshold,
            max_clusters: config.max_clusters,
            bin_width: config.bin_width,
            missing_policy: policy_name(config.missing_policy).to_string(),
            balance_beta: config.balance_beta,
        }
    }

    pub fn to_config(&self) -> anyhow::Result<ClustererConfig> {
        let schema = self
            .attributes
            .iter()
            .map(|a| match a.kind.as_str() {
                "categorical" => Ok(AttributeKind::Categorical),
                "numeric" => Ok(AttributeKind::Numeric),
                other => Err(anyhow::anyhow!("unknown attribute kind {other:?}")),
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let policy = parse_policy(&self.missing_policy)
            .ok_or_else(|| anyhow::anyhow!("unknown missing policy {:?}", self.missing_policy))?;
        Ok(ClustererConfig::new(schema, self.epsilon, self.support)
            .with_sim_threshold(self.sim_threshold)
            .with_max_clusters(self.max_clusters)
            .with_bin_width(self.bin_width)
            .with_missing_policy(policy)
            .with_balance_beta(self.balance_beta))
    }

    pub fn names(&self) -> Vec<String> {
        self.attributes.iter().map(|a| a.name.clone()).collect()
    }
}

/// Run summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: String,
    pub config: serde_json::Value,
    pub k: usize,
    pub n: u64,
    pub rejected: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absolute_error: Option<f64>,
    pub total_entries: usize,
    pub prunings: u64,
    pub elapsed_ms: f64,
}

impl Summary {
    pub fn set_quality<L>(&mut self, q: &Quality<L>) {
        self.accuracy = Some(q.accuracy);
        self.error = Some(q.error);
        self.absolute_error = Some(q.absolute_error);
    }
}

/// One `(value, f, delta)` entry.
pub type EntryTriple = (String, u64, u64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterDump {
    pub size: u64,
    pub prune_count: u64,
    /// Per attribute, entries sorted by value.
    pub attributes: Vec<Vec<EntryTriple>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub config: ConfigEcho,
    pub total_seen: u64,
    pub clusters: Vec<ClusterDump>,
}

impl ModelDump {
    pub fn from_snapshot(snapshot: &ModelSnapshot, names: &[String]) -> Self {
        let symbols = snapshot.symbols();
        let clusters = snapshot
            .clusters()
            .iter()
            .map(|c| ClusterDump {
                size: c.size(),
                prune_count: c.prune_count(),
                attributes: c
                    .attributes()
                    .iter()
                    .map(|h| {
                        let mut entries: Vec<EntryTriple> = h
                            .iter()
                            .map(|e| (symbols.resolve(e.value).to_string(), e.f, e.delta))
                            .collect();
                        entries.sort_unstable();
                        entries
                    })
                    .collect(),
            })
            .collect();
        ModelDump {
            config: ConfigEcho::new(snapshot.config(), names),
            total_seen: snapshot.total_seen(),
            clusters,
        }
    }

    /// Rebuilds a snapshot with a fresh symbol table.
    pub fn to_snapshot(&self) -> anyhow::Result<ModelSnapshot> {
        let config = self.config.to_config()?;
        let mut symbols = SymbolTable::new();
        let clusters = self
            .clusters
            .iter()
            .map(|c| {
                let attributes = c
                    .attributes
                    .iter()
                    .map(|entries| {
                        let mut h = AttributeHistogram::new();
                        for (value, f, delta) in entries {
                            h.insert_entry(LossyEntry {
                                value: symbols.intern(value),
                                f: *f,
                                delta: *delta,
                            });
                        }
                        h
                    })
                    .collect();
                ClusterHistogram::from_parts(attributes, c.size, c.prune_count)
            })
            .collect();
        Ok(ModelSnapshot::from_parts(config, clusters, symbols)?)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let f = io::BufReader::new(std::fs::File::open(path)?);
    Ok(serde_json::from_reader(f)?)
}
