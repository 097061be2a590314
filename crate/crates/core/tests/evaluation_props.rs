use proptest::prelude::*;
use streamclucd_core::evaluation::accuracy;

fn labelled(max: usize) -> impl Strategy<Value = (Vec<usize>, Vec<u8>)> {
    (1usize..max).prop_flat_map(|n| (prop::collection::vec(0usize..6, n), prop::collection::vec(0u8..4, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn relabelling_clusters_and_classes_keeps_accuracy((assign, labels) in labelled(200), shift in 1usize..50, key in 1u8..4) {
        let base = accuracy(&assign, &labels).unwrap();
        // injective relabelling of cluster ids and of class names
        let assign2: Vec<usize> = assign.iter().map(|c| (5 - c) * 7 + shift).collect();
        let labels2: Vec<u8> = labels.iter().map(|l| (l + key) % 4 + 10).collect();
        let other = accuracy(&assign2, &labels2).unwrap();
        prop_assert_eq!(base.accuracy, other.accuracy);
        prop_assert_eq!(base.misclassified, other.misclassified);
        prop_assert_eq!(base.k, other.k);
    }

    #[test]
    fn report_invariants((assign, labels) in labelled(200)) {
        let q = accuracy(&assign, &labels).unwrap();
        let total: u64 = q.per_cluster_dominant.iter().map(|d| d.count).sum();
        prop_assert!(total <= q.n);
        prop_assert_eq!(q.accuracy, total as f64 / q.n as f64);
        prop_assert_eq!(q.absolute_error, q.error * q.n as f64);
        prop_assert!((0.0..=1.0).contains(&q.accuracy));
    }

    #[test]
    fn one_cluster_and_singletons((_, labels) in labelled(200)) {
        let n = labels.len();
        let one = accuracy(&vec![0; n], &labels).unwrap();
        let largest = (0..4u8).map(|c| labels.iter().filter(|l| **l == c).count()).max().unwrap();
        prop_assert_eq!(one.accuracy, largest as f64 / n as f64);
        let singletons: Vec<usize> = (0..n).collect();
        prop_assert_eq!(accuracy(&singletons, &labels).unwrap().accuracy, 1.0);
    }
}
