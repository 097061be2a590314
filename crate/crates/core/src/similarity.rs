//! Record/record, record/set and record/histogram dissimilarities.
//!
//! The clusterer only uses [`histogram_similarity`]; the distance forms exist
//! as reference oracles. Over an exact histogram of a set `D` of `n` records,
//! `histogram_distance(H_D, y) == set_distance(D, y)` and
//! `histogram_similarity(H_D, y) == m - set_distance(D, y)`.

use crate::error::{Error, Result};
use crate::lossy::{AttributeHistogram, ClusterHistogram, LossyParams};
use crate::record::Record;
use crate::symbol::Symbol;

/// Simple matching: 0 when equal, 1 otherwise.
#[inline]
pub fn delta(x: Symbol, y: Symbol) -> u32 {
    u32::from(x != y)
}

/// Number of mismatching positions.
pub fn record_distance(x: &Record, y: &Record) -> Result<usize> {
    if x.arity() != y.arity() {
        return Err(Error::ArityMismatch {
            expected: x.arity(),
            found: y.arity(),
        });
    }
    let mut d = 0;
    for (index, (a, b)) in x.cells().iter().zip(y.cells()).enumerate() {
        match (a, b) {
            (Some(a), Some(b)) => d += delta(*a, *b) as usize,
            _ => return Err(Error::MissingCell { index }),
        }
    }
    Ok(d)
}

/// Mean [`record_distance`] from `y` to each record of the set.
pub fn set_distance(records: &[Record], y: &Record) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut total = 0usize;
    for x in records {
        total += record_distance(x, y)?;
    }
    Ok(total as f64 / records.len() as f64)
}

fn check(hist: &ClusterHistogram, y: &Record) -> Result<()> {
    if hist.size() == 0 {
        return Err(Error::EmptyCluster);
    }
    if hist.arity() != y.arity() {
        return Err(Error::ArityMismatch {
            expected: hist.arity(),
            found: y.arity(),
        });
    }
    Ok(())
}

/// Mass of qualifying entries whose value differs from `value`.
fn mismatched_mass(h: &AttributeHistogram, value: Symbol, params: &LossyParams, size: u64) -> u64 {
    h.qualifying_entries(params, size)
        .map(|(v, f)| f * u64::from(delta(v, value)))
        .sum()
}

/// Average distance between `y` and the records summarised by `hist`, using
/// only qualifying entries. Missing cells of `y` contribute nothing.
pub fn histogram_distance(hist: &ClusterHistogram, y: &Record, params: &LossyParams) -> Result<f64> {
    check(hist, y)?;
    let size = hist.size();
    let total: u64 = hist
        .attributes()
        .iter()
        .zip(y.cells())
        .filter_map(|(h, cell)| cell.map(|v| mismatched_mass(h, v, params, size)))
        .sum();
    Ok(total as f64 / size as f64)
}

/// Sum over attributes of the qualifying estimated frequency of `y`'s value.
/// `threshold` is `params.qualifying_threshold(hist.size())`.
#[inline]
pub(crate) fn matched_mass(hist: &ClusterHistogram, y: &Record, threshold: f64) -> u64 {
    let mut mass = 0;
    for (h, cell) in hist.attributes().iter().zip(y.cells()) {
        if let Some(entry) = cell.and_then(|v| h.entry(v)) {
            if entry.f as f64 >= threshold {
                mass += entry.f;
            }
        }
    }
    mass
}

/// Similarity of `y` to a cluster, in `[0, m]`: for each attribute the
/// estimated frequency of `y`'s value (when that entry qualifies), summed and
/// divided by the cluster size. Missing cells contribute 0; the divisor is
/// not reduced for them.
pub fn histogram_similarity(hist: &ClusterHistogram, y: &Record, params: &LossyParams) -> Result<f64> {
    check(hist, y)?;
    let threshold = params.qualifying_threshold(hist.size());
    Ok(matched_mass(hist, y, threshold) as f64 / hist.size() as f64)
}
