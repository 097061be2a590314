//! Brute-force oracles shared by the property suites. Nothing here calls into
//! the histogram or similarity code it is used to check.
#![allow(dead_code)]

use std::collections::HashMap;

use streamclucd_core::{Record, Symbol, SymbolTable};

pub fn exact_counts(values: &[u32]) -> HashMap<u32, u64> {
    let mut m = HashMap::new();
    for v in values {
        *m.entry(*v).or_insert(0) += 1;
    }
    m
}

/// Sum over records and attributes of `[x_j == y_j]`, divided by `n`.
pub fn brute_similarity(rows: &[Vec<u32>], y: &[u32]) -> f64 {
    let matches: usize = rows
        .iter()
        .map(|x| x.iter().zip(y).filter(|(a, b)| a == b).count())
        .sum();
    matches as f64 / rows.len() as f64
}

pub fn brute_distance(rows: &[Vec<u32>], y: &[u32]) -> f64 {
    let mismatches: usize = rows
        .iter()
        .map(|x| x.iter().zip(y).filter(|(a, b)| a != b).count())
        .sum();
    mismatches as f64 / rows.len() as f64
}

/// Interns `v<i>` for every raw index so that symbol order follows index order.
pub fn to_records(table: &mut SymbolTable, rows: &[Vec<u32>]) -> Vec<Record> {
    rows.iter()
        .map(|r| Record::from_symbols(r.iter().map(|v| table.intern(&format!("v{v}")))))
        .collect()
}

pub fn symbol_of(table: &mut SymbolTable, v: u32) -> Symbol {
    table.intern(&format!("v{v}"))
}

/// Plain Squeezer written without any of the crate's histogram types: list
/// of per-attribute count maps per cluster, strict threshold, lowest index on
/// ties.
pub fn naive_squeezer(rows: &[Vec<u32>], st: f64) -> (Vec<usize>, Vec<Vec<HashMap<u32, u64>>>) {
    let mut clusters: Vec<(u64, Vec<HashMap<u32, u64>>)> = Vec::new();
    let mut out = Vec::new();
    for r in rows {
        let mut best: Option<(usize, f64)> = None;
        for (i, (n, hs)) in clusters.iter().enumerate() {
            let mass: u64 = hs.iter().zip(r).map(|(h, v)| h.get(v).copied().unwrap_or(0)).sum();
            let sim = mass as f64 / *n as f64;
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((i, sim));
            }
        }
        let target = match best {
            Some((i, sim)) if sim > st => i,
            _ => {
                clusters.push((0, vec![HashMap::new(); r.len()]));
                clusters.len() - 1
            }
        };
        let (n, hs) = &mut clusters[target];
        *n += 1;
        for (h, v) in hs.iter_mut().zip(r) {
            *h.entry(*v).or_insert(0) += 1;
        }
        out.push(target);
    }
    (out, clusters.into_iter().map(|(_, h)| h).collect())
}
