use alloc::vec::Vec;
use core::borrow::Borrow;

use crate::clusterer::{AssignmentOutcome, Rejection, StreamOutcome};
use crate::error::{Error, Result};
use crate::record::Record;
use crate::symbol::Symbol;
use crate::FxHashMap;

/// Exact histogram of one cluster: every value with its true count.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExactCluster {
    counts: Vec<FxHashMap<Symbol, u64>>,
    size: u64,
}

impl ExactCluster {
    fn new(arity: usize) -> Self {
        ExactCluster {
            counts: (0..arity).map(|_| FxHashMap::default()).collect(),
            size: 0,
        }
    }

    fn add(&mut self, record: &Record) {
        self.size += 1;
        for (counts, cell) in self.counts.iter_mut().zip(record.cells()) {
            if let Some(v) = cell {
                *counts.entry(*v).or_insert(0) += 1;
            }
        }
    }

    fn similarity(&self, record: &Record) -> f64 {
        let mass: u64 = self
            .counts
            .iter()
            .zip(record.cells())
            .filter_map(|(counts, cell)| cell.and_then(|v| counts.get(&v)))
            .sum();
        mass as f64 / self.size as f64
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn count(&self, attr: usize, value: Symbol) -> u64 {
        self.counts
            .get(attr)
            .and_then(|c| c.get(&value))
            .copied()
            .unwrap_or(0)
    }

    /// Per attribute, `(value, count)` sorted by value.
    pub fn sorted_counts(&self) -> Vec<Vec<(Symbol, u64)>> {
        self.counts
            .iter()
            .map(|c| {
                let mut v: Vec<_> = c.iter().map(|(s, n)| (*s, *n)).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    pub fn entry_count(&self) -> usize {
        self.counts.iter().map(|c| c.len()).sum()
    }
}

/// One-pass clustering over exact histograms: no pruning, no filtering.
#[derive(Clone, Debug)]
pub struct SqueezerModel {
    sim_threshold: f64,
    arity: Option<usize>,
    clusters: Vec<ExactCluster>,
    offered: u64,
}

impl SqueezerModel {
    pub fn new(sim_threshold: f64) -> Self {
        SqueezerModel {
            sim_threshold,
            arity: None,
            clusters: Vec::new(),
            offered: 0,
        }
    }

    pub fn clusters(&self) -> &[ExactCluster] {
        &self.clusters
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn total_seen(&self) -> u64 {
        self.clusters.iter().map(|c| c.size).sum()
    }

    pub fn entry_count(&self) -> usize {
        self.clusters.iter().map(ExactCluster::entry_count).sum()
    }

    pub fn process_record(&mut self, record: &Record) -> StreamOutcome {
        let record_index = self.offered;
        self.offered += 1;
        self.assign(record, record_index)
            .map_err(|error| Rejection { record_index, error })
    }

    fn assign(&mut self, record: &Record, record_index: u64) -> Result<AssignmentOutcome> {
        let arity = *self.arity.get_or_insert(record.arity());
        if record.arity() != arity {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: record.arity(),
            });
        }
        let mut best = (0, f64::NEG_INFINITY);
        for (i, c) in self.clusters.iter().enumerate() {
            let sim = c.similarity(record);
            if sim > best.1 {
                best = (i, sim);
            }
        }
        let (cluster_index, created_new, best_similarity) = if best.1 > self.sim_threshold {
            self.clusters[best.0].add(record);
            (best.0, false, best.1)
        } else {
            let mut c = ExactCluster::new(arity);
            c.add(record);
            self.clusters.push(c);
            (self.clusters.len() - 1, true, best.1.max(0.0))
        };
        Ok(AssignmentOutcome {
            record_index,
            cluster_index,
            created_new,
            best_similarity,
        })
    }
}

/// Runs the exact one-pass clusterer over a stream of preprocessed records.
pub fn squeezer_run<R: Borrow<Record>>(
    sim_threshold: f64,
    records: impl IntoIterator<Item = R>,
) -> (SqueezerModel, Vec<StreamOutcome>) {
    let mut model = SqueezerModel::new(sim_threshold);
    let outcomes = records
        .into_iter()
        .map(|r| model.process_record(r.borrow()))
        .collect();
    (model, outcomes)
}
