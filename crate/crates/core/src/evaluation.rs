//! Clustering accuracy and memory accounting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::time::Duration;

use crate::clusterer::{ClusterModel, ModelSnapshot};
use crate::error::{Error, Result};
use crate::lossy::{ClusterHistogram, LossyParams};

/// Cluster `cluster` is dominated by `label`, which `count` of its members carry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominantClass<L> {
    pub cluster: usize,
    pub label: L,
    pub count: u64,
}

/// Accuracy `r = sum(a_i) / n`, error `e = 1 - r` and absolute error `ace = e * n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quality<L> {
    pub accuracy: f64,
    pub error: f64,
    pub absolute_error: f64,
    /// `n - sum(a_i)`, the integer form of `absolute_error`.
    pub misclassified: u64,
    pub n: u64,
    /// Number of non-empty clusters.
    pub k: usize,
    /// Ordered by cluster index.
    pub per_cluster_dominant: Vec<DominantClass<L>>,
}

/// Everything measured for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport<L> {
    pub quality: Option<Quality<L>>,
    pub clusters: usize,
    pub total_entries: usize,
    pub prunings: u64,
    pub elapsed: Duration,
}

/// Scores a partition against class labels. A cluster's dominant class is the
/// most frequent label among its members (smallest label on ties).
pub fn accuracy<L: Clone + Ord>(assignments: &[usize], labels: &[L]) -> Result<Quality<L>> {
    if assignments.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: assignments.len(),
            right: labels.len(),
        });
    }
    if assignments.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut table: BTreeMap<usize, BTreeMap<&L, u64>> = BTreeMap::new();
    for (c, l) in assignments.iter().zip(labels) {
        *table.entry(*c).or_default().entry(l).or_insert(0) += 1;
    }
    let per_cluster_dominant: Vec<DominantClass<L>> = table
        .iter()
        .map(|(c, counts)| {
            let (label, count) = counts
                .iter()
                .fold((None, 0), |best, (l, n)| if *n > best.1 { (Some(*l), *n) } else { best });
            DominantClass {
                cluster: *c,
                label: label.expect("non-empty cluster").clone(),
                count,
            }
        })
        .collect();
    let n = assignments.len() as u64;
    let correct: u64 = per_cluster_dominant.iter().map(|d| d.count).sum();
    let accuracy = correct as f64 / n as f64;
    let error = 1.0 - accuracy;
    Ok(Quality {
        accuracy,
        error,
        absolute_error: error * n as f64,
        misclassified: n - correct,
        n,
        k: per_cluster_dominant.len(),
        per_cluster_dominant,
    })
}

/// `(1/epsilon) * ln(epsilon * n)`: entry bound of one Lossy Counting synopsis
/// after `n` items. Only meaningful for `epsilon * n >= 3`.
pub fn lossy_space_bound(epsilon: f64, n: u64) -> f64 {
    libm::log(epsilon * n as f64) / epsilon
}

/// Whole-model bound over `m` attributes and `k` clusters holding `n` records:
/// `m * (k/epsilon) * (ln epsilon + ln ceil(n/k))`.
pub fn stream_space_bound(epsilon: f64, n: u64, k: usize, m: usize) -> f64 {
    let per_cluster = n.div_ceil(k as u64) as f64;
    m as f64 * (k as f64 / epsilon) * (libm::log(epsilon) + libm::log(per_cluster))
}

/// Expected entry bound for i.i.d. streams: `7 * k * m / epsilon`.
pub fn iid_space_bound(epsilon: f64, k: usize, m: usize) -> f64 {
    7.0 * k as f64 * m as f64 / epsilon
}

/// One checked (cluster, attribute) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub cluster: usize,
    pub attribute: usize,
    pub entries: usize,
    pub bound: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoryReport {
    pub total_entries: usize,
    /// `per_cluster[i][j]`: entries of attribute `j` in cluster `i`.
    pub per_cluster: Vec<Vec<usize>>,
    /// Only pairs whose cluster satisfies `epsilon * N_i >= 3`.
    pub bound_checks: Vec<BoundCheck>,
}

impl MemoryReport {
    pub fn bounds_hold(&self) -> bool {
        self.bound_checks.iter().all(|b| b.satisfied)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BoundCheck> {
        self.bound_checks.iter().filter(|b| !b.satisfied)
    }
}

pub fn memory_report_of(clusters: &[ClusterHistogram], params: &LossyParams) -> MemoryReport {
    let eps = params.epsilon();
    let mut bound_checks = Vec::new();
    let per_cluster: Vec<Vec<usize>> = clusters
        .iter()
        .map(|c| c.attributes().iter().map(|h| h.len()).collect())
        .collect();
    for (i, (c, counts)) in clusters.iter().zip(&per_cluster).enumerate() {
        if eps * c.size() as f64 >= 3.0 {
            let bound = lossy_space_bound(eps, c.size());
            for (j, &entries) in counts.iter().enumerate() {
                bound_checks.push(BoundCheck {
                    cluster: i,
                    attribute: j,
                    entries,
                    bound,
                    satisfied: entries as f64 <= bound,
                });
            }
        }
    }
    MemoryReport {
        total_entries: per_cluster.iter().flatten().sum(),
        per_cluster,
        bound_checks,
    }
}

pub fn memory_report(model: &ClusterModel) -> MemoryReport {
    memory_report_of(model.clusters(), model.params())
}

pub fn snapshot_memory_report(snapshot: &ModelSnapshot) -> MemoryReport {
    memory_report_of(snapshot.clusters(), snapshot.params())
}
