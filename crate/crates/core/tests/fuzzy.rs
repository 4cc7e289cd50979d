mod common;

use proptest::prelude::*;
use topicflow_core::reduce::{build_knn_graph, fuzzy_union, smooth_knn, KnnGraph};
use topicflow_core::{Matrix, Metric};

#[test]
fn bandwidth_residual_is_small() {
    for seed in 0..10 {
        let pts = common::random_points(60, 6, seed);
        let k = 15;
        let g = build_knn_graph(&Matrix::from_rows(&pts), k, Metric::Euclidean).unwrap();
        let sets = smooth_knn(&g);
        let target = (k as f64).log2();
        for i in 0..10 {
            let row = (seed as usize * 7 + i * 5) % 60;
            assert!(!sets.degenerate.contains(&row));
            let sum: f64 = g
                .distances(row)
                .iter()
                .map(|d| (-(d - sets.rho[row]).max(0.0) / sets.sigma[row]).exp())
                .sum();
            assert!((sum - target).abs() < 1e-4, "row {row}: {sum}");
            assert!(sets.rho[row] == g.distances(row).iter().copied().find(|&d| d > 0.0).unwrap());
        }
    }
}

#[test]
fn duplicates_flag_degenerate_rows() {
    let pts = vec![vec![0.0, 0.0]; 5];
    let g = build_knn_graph(&Matrix::from_rows(&pts), 3, Metric::Euclidean).unwrap();
    let sets = smooth_knn(&g);
    assert_eq!(sets.degenerate.len(), 5);
    assert!(sets.memberships.iter().all(|m| m.is_finite()));
}

proptest! {
    #[test]
    fn union_is_symmetric_and_bounded(seed in 0u64..500, n in 6usize..30, k in 2usize..6) {
        let pts = common::random_points(n, 3, seed);
        let g: KnnGraph = build_knn_graph(&Matrix::from_rows(&pts), k, Metric::Euclidean).unwrap();
        let sets = smooth_knn(&g);
        let u = fuzzy_union(&sets, &g);
        for (i, j, w) in u.entries() {
            prop_assert!(w > 0.0 && w <= 1.0 + 1e-12);
            prop_assert_eq!(w, u.weight(j, i));
        }
        for i in 0..n {
            for (pos, &j) in g.neighbors(i).iter().enumerate() {
                let a = sets.row(i)[pos];
                let b = g.neighbors(j).iter().position(|&x| x == i).map_or(0.0, |p| sets.row(j)[p]);
                let want = a + b - a * b;
                if want > 0.0 {
                    prop_assert!((u.weight(i, j) - want).abs() < 1e-12);
                }
            }
        }
    }
}
