//! k-modes and its chunked (compress-then-recluster) streaming variant.
//!
//! Distances are simple-matching counts. Modes take, per attribute, the most
//! frequent value among the members (weighted); equal frequencies resolve to
//! the lexicographically smallest token, so results are deterministic for a
//! fixed record order. Initial modes are the first `k` distinct records.

use alloc::vec;
use alloc::vec::Vec;
use core::borrow::Borrow;

use crate::error::{Error, Result};
use crate::record::Record;
use crate::symbol::{Symbol, SymbolTable};
use crate::FxHashMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mode {
    pub values: Vec<Symbol>,
    /// Total weight of the members (records represented).
    pub weight: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KModesResult {
    pub modes: Vec<Mode>,
    /// Cluster index per input record.
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

fn distance(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn nearest(point: &[Symbol], modes: &[Vec<Symbol>]) -> usize {
    let mut best = (0, usize::MAX);
    for (i, m) in modes.iter().enumerate() {
        let d = distance(point, m);
        if d < best.1 {
            best = (i, d);
            if d == 0 {
                break;
            }
        }
    }
    best.0
}

fn to_points<R: Borrow<Record>>(records: impl IntoIterator<Item = R>) -> Result<Vec<Vec<Symbol>>> {
    let mut arity = None;
    records
        .into_iter()
        .map(|r| {
            let r = r.borrow();
            let expected = *arity.get_or_insert(r.arity());
            if r.arity() != expected {
                return Err(Error::ArityMismatch {
                    expected,
                    found: r.arity(),
                });
            }
            r.complete()
        })
        .collect()
}

fn distinct_count(points: &[Vec<Symbol>]) -> usize {
    let mut seen: hashbrown::HashSet<&[Symbol], rustc_hash::FxBuildHasher> = Default::default();
    points.iter().filter(|p| seen.insert(p.as_slice())).count()
}

/// Per-attribute weighted majority; ties go to the lexicographically smallest token.
fn majority(counts: &FxHashMap<Symbol, u64>, symbols: &SymbolTable) -> Option<Symbol> {
    counts
        .iter()
        .max_by(|(va, ca), (vb, cb)| {
            ca.cmp(cb).then_with(|| match (symbols.try_resolve(**va), symbols.try_resolve(**vb)) {
                (Some(a), Some(b)) => b.cmp(a),
                _ => vb.cmp(va),
            })
        })
        .map(|(v, _)| *v)
}

/// k-modes over weighted points. `weights[i]` is the multiplicity of `points[i]`.
pub fn weighted_kmodes(
    points: &[Vec<Symbol>],
    weights: &[u64],
    k: usize,
    max_iter: usize,
    symbols: &SymbolTable,
) -> Result<KModesResult> {
    if points.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: points.len(),
            right: weights.len(),
        });
    }
    if k == 0 || max_iter == 0 {
        return Err(Error::Config("k and max_iter must be positive".into()));
    }
    let arity = points.first().map_or(0, Vec::len);
    if let Some(p) = points.iter().find(|p| p.len() != arity) {
        return Err(Error::ArityMismatch {
            expected: arity,
            found: p.len(),
        });
    }

    let mut modes: Vec<Vec<Symbol>> = Vec::with_capacity(k);
    {
        let mut seen: hashbrown::HashSet<&[Symbol], rustc_hash::FxBuildHasher> = Default::default();
        for p in points {
            if seen.insert(p.as_slice()) {
                modes.push(p.clone());
                if modes.len() == k {
                    break;
                }
            }
        }
    }
    if modes.len() < k {
        return Err(Error::TooFewDistinct {
            k,
            distinct: distinct_count(points),
        });
    }

    let mut assignments = vec![usize::MAX; points.len()];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut changed = false;
        for (p, a) in points.iter().zip(assignments.iter_mut()) {
            let c = nearest(p, &modes);
            if c != *a {
                *a = c;
                changed = true;
            }
        }
        changed |= repair_empty(points, &mut modes, &mut assignments);
        if !changed {
            break;
        }
        update_modes(points, weights, &assignments, &mut modes, symbols);
    }

    let mut totals = vec![0u64; k];
    for (a, w) in assignments.iter().zip(weights) {
        totals[*a] += w;
    }
    Ok(KModesResult {
        modes: modes
            .into_iter()
            .zip(totals)
            .map(|(values, weight)| Mode { values, weight })
            .collect(),
        assignments,
        iterations,
    })
}

/// Reseeds every empty cluster with the point farthest from its own mode,
/// taken from a cluster that has more than one member.
fn repair_empty(points: &[Vec<Symbol>], modes: &mut [Vec<Symbol>], assignments: &mut [usize]) -> bool {
    let mut members = vec![0usize; modes.len()];
    for a in assignments.iter() {
        members[*a] += 1;
    }
    let mut changed = false;
    for c in 0..modes.len() {
        if members[c] > 0 {
            continue;
        }
        let donor = points
            .iter()
            .enumerate()
            .filter(|(i, _)| members[assignments[*i]] > 1)
            .map(|(i, p)| (i, distance(p, &modes[assignments[i]])))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        if let Some((i, _)) = donor {
            members[assignments[i]] -= 1;
            members[c] = 1;
            assignments[i] = c;
            modes[c] = points[i].clone();
            changed = true;
        }
    }
    changed
}

fn update_modes(
    points: &[Vec<Symbol>],
    weights: &[u64],
    assignments: &[usize],
    modes: &mut [Vec<Symbol>],
    symbols: &SymbolTable,
) {
    let arity = modes.first().map_or(0, Vec::len);
    let mut counts: Vec<Vec<FxHashMap<Symbol, u64>>> = (0..modes.len())
        .map(|_| (0..arity).map(|_| FxHashMap::default()).collect())
        .collect();
    for ((p, w), a) in points.iter().zip(weights).zip(assignments) {
        for (slot, v) in counts[*a].iter_mut().zip(p) {
            *slot.entry(*v).or_insert(0) += w;
        }
    }
    for (mode, cluster_counts) in modes.iter_mut().zip(&counts) {
        for (value, attr_counts) in mode.iter_mut().zip(cluster_counts) {
            if let Some(v) = majority(attr_counts, symbols) {
                *value = v;
            }
        }
    }
}

/// Batch k-modes. Records must be complete (no missing cells).
pub fn kmodes_fit(records: &[Record], k: usize, max_iter: usize, symbols: &SymbolTable) -> Result<KModesResult> {
    let points = to_points(records)?;
    let weights = vec![1; points.len()];
    weighted_kmodes(&points, &weights, k, max_iter, symbols)
}

/// Chunked streaming k-modes: each chunk of `chunk_size` records is reduced
/// to `k` weighted modes and discarded; the retained modes are then
/// re-clustered into `k` final modes. Each record is labelled through the
/// chunk-level mode it was assigned to, so no record is read twice.
pub fn chunked_kmodes_stream<R: Borrow<Record>>(
    records: impl IntoIterator<Item = R>,
    k: usize,
    chunk_size: usize,
    max_iter: usize,
    symbols: &SymbolTable,
) -> Result<KModesResult> {
    if chunk_size < k || k == 0 {
        return Err(Error::Config(alloc::format!(
            "chunk size {chunk_size} must be at least k = {k} > 0"
        )));
    }
    let mut retained: Vec<Vec<Symbol>> = Vec::new();
    let mut retained_weights: Vec<u64> = Vec::new();
    let mut index: FxHashMap<Vec<Symbol>, usize> = FxHashMap::default();
    let mut via: Vec<usize> = Vec::new();
    let mut chunk: Vec<Vec<Symbol>> = Vec::with_capacity(chunk_size);
    let mut arity = None;

    let mut flush = |chunk: &mut Vec<Vec<Symbol>>| -> Result<()> {
        if chunk.is_empty() {
            return Ok(());
        }
        // a short trailing chunk may hold fewer than k distinct records
        let kk = k.min(distinct_count(chunk));
        let ones = vec![1; chunk.len()];
        let local = weighted_kmodes(chunk, &ones, kk, max_iter, symbols)?;
        let slots: Vec<usize> = local
            .modes
            .into_iter()
            .map(|m| {
                let slot = *index.entry(m.values.clone()).or_insert_with(|| {
                    retained.push(m.values);
                    retained_weights.push(0);
                    retained.len() - 1
                });
                retained_weights[slot] += m.weight;
                slot
            })
            .collect();
        via.extend(local.assignments.iter().map(|a| slots[*a]));
        chunk.clear();
        Ok(())
    };

    for r in records {
        let r = r.borrow();
        let expected = *arity.get_or_insert(r.arity());
        if r.arity() != expected {
            return Err(Error::ArityMismatch {
                expected,
                found: r.arity(),
            });
        }
        chunk.push(r.complete()?);
        if chunk.len() == chunk_size {
            flush(&mut chunk)?;
        }
    }
    flush(&mut chunk)?;

    let global = weighted_kmodes(&retained, &retained_weights, k, max_iter, symbols)?;
    let assignments = via.iter().map(|slot| global.assignments[*slot]).collect();
    Ok(KModesResult {
        modes: global.modes,
        assignments,
        iterations: global.iterations,
    })
}
