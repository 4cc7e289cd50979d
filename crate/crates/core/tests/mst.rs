mod common;

use rand::Rng;
use topicflow_core::cluster::{build_mst, core_distances, mutual_reachability};
use topicflow_core::Matrix;

#[test]
fn total_weight_matches_brute_force() {
    let mut r = common::rng(11);
    for case in 0..50 {
        let n = r.random_range(2..=50);
        let dim = r.random_range(1..=4);
        let min_samples = r.random_range(1..n.min(8));
        let pts = common::random_points(n, dim, case);
        let m = Matrix::from_rows(&pts);
        let core = core_distances(&m, min_samples).unwrap();
        let oracle_core = common::core_oracle(&pts, min_samples);
        for (a, b) in core.iter().zip(&oracle_core) {
            assert!((a - b).abs() < 1e-12);
        }
        let edges = build_mst(&m, &core);
        assert_eq!(edges.len(), n - 1);
        assert!(edges.windows(2).all(|w| w[0].weight <= w[1].weight));
        let total: f64 = edges.iter().map(|e| e.weight).sum();
        let w = common::mreach_matrix(&pts, &oracle_core);
        let prim = common::prim_total(&w);
        assert!((total - prim).abs() < 1e-9, "case {case}: {total} vs {prim}");
        assert!((prim - common::kruskal_total(&w)).abs() < 1e-9);
    }
}

#[test]
fn line_example_cores() {
    let m = Matrix::from_rows(&[[0.0], [1.0], [2.0], [10.0]]);
    let core = core_distances(&m, 2).unwrap();
    assert_eq!(core[0], 1.0);
    assert_eq!(core[3], 8.0);
    assert_eq!(core_distances(&m, 1).unwrap(), [0.0; 4]);
    assert!(core_distances(&m, 4).is_err());
    assert_eq!(mutual_reachability(1.0, 1.0, 8.0), 8.0);
    assert_eq!(mutual_reachability(5.0, 1.0, 1.0), 5.0);
}

#[test]
fn triangle() {
    let m = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]);
    let edges = build_mst(&m, &[0.0; 3]);
    let w: Vec<f64> = edges.iter().map(|e| e.weight).collect();
    assert_eq!(w, [1.0, 2.0]);
}
