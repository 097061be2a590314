mod common;

use proptest::prelude::*;
use streamclucd_core::baselines::{chunked_kmodes_stream, kmodes_fit, squeezer_run, weighted_kmodes};
use streamclucd_core::datagen::{generate, GenSpec};
use streamclucd_core::evaluation::accuracy;
use streamclucd_core::SymbolTable;

use common::{exact_counts, to_records};

fn rows(max: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    (1usize..6).prop_flat_map(move |m| prop::collection::vec(prop::collection::vec(0u32..4, m), 1..max))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn squeezer_counts_are_exact(data in rows(200), st in 0.0f64..3.0) {
        let mut t = SymbolTable::new();
        let records = to_records(&mut t, &data);
        let (model, out) = squeezer_run(st, &records);
        let assigned: Vec<usize> = out.iter().map(|o| o.as_ref().unwrap().cluster_index).collect();
        for (ci, cluster) in model.clusters().iter().enumerate() {
            let members: Vec<&Vec<u32>> = data.iter().zip(&assigned).filter(|(_, a)| **a == ci).map(|(r, _)| r).collect();
            prop_assert_eq!(cluster.size(), members.len() as u64);
            for j in 0..data[0].len() {
                let col: Vec<u32> = members.iter().map(|r| r[j]).collect();
                for (v, n) in exact_counts(&col) {
                    prop_assert_eq!(cluster.count(j, t.get(&format!("v{v}")).unwrap()), n);
                }
            }
        }
    }

    #[test]
    fn kmodes_is_deterministic_and_valid(data in rows(120), k in 1usize..5) {
        let mut t = SymbolTable::new();
        let records = to_records(&mut t, &data);
        match kmodes_fit(&records, k, 30, &t) {
            Ok(a) => {
                let b = kmodes_fit(&records, k, 30, &t).unwrap();
                prop_assert_eq!(&a, &b);
                prop_assert_eq!(a.modes.len(), k);
                prop_assert!(a.iterations <= 30);
                prop_assert!(a.assignments.iter().all(|c| *c < k));
                prop_assert_eq!(a.modes.iter().map(|m| m.weight).sum::<u64>(), data.len() as u64);
            }
            Err(_) => {
                let distinct: std::collections::HashSet<_> = data.iter().collect();
                prop_assert!(distinct.len() < k);
            }
        }
    }

    #[test]
    fn equal_weights_reduce_to_unweighted(data in rows(80), k in 1usize..4, w in 1u64..9) {
        let mut t = SymbolTable::new();
        let records = to_records(&mut t, &data);
        let points: Vec<Vec<_>> = records.iter().map(|r| r.complete().unwrap()).collect();
        let ones = vec![1; points.len()];
        let heavy = vec![w; points.len()];
        if let Ok(a) = weighted_kmodes(&points, &ones, k, 30, &t) {
            let b = weighted_kmodes(&points, &heavy, k, 30, &t).unwrap();
            prop_assert_eq!(&a.assignments, &b.assignments);
            let va: Vec<_> = a.modes.iter().map(|m| &m.values).collect();
            let vb: Vec<_> = b.modes.iter().map(|m| &m.values).collect();
            prop_assert_eq!(va, vb);
        }
    }

    #[test]
    fn chunk_weights_are_conserved(data in rows(300), chunk in 4usize..50) {
        let mut t = SymbolTable::new();
        let records = to_records(&mut t, &data);
        if let Ok(res) = chunked_kmodes_stream(&records, 2, chunk, 20, &t) {
            prop_assert_eq!(res.modes.iter().map(|m| m.weight).sum::<u64>(), data.len() as u64);
            prop_assert_eq!(res.assignments.len(), data.len());
        }
    }
}

#[test]
fn chunked_kmodes_recovers_pure_classes() {
    let spec = GenSpec::new(5000, 8, 4).with_purity(1.0).with_seed(9);
    let d = generate(&spec).unwrap();
    let mut t = SymbolTable::new();
    let records = d.interned(&mut t, usize::MAX);
    let res = chunked_kmodes_stream(&records, 4, 1000, 100, &t).unwrap();
    let q = accuracy(&res.assignments, d.labels()).unwrap();
    assert_eq!(q.accuracy, 1.0);
}
