//! Clustering agreement and embedding quality scores.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::matrix::{squared_euclidean, Matrix};

fn comb2(n: u64) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

/// Adjusted Rand index between two labelings of the same items. Noise
/// labels are treated as an ordinary class. Two labelings that both put
/// everything in one class score 1.
pub fn adjusted_rand_index(a: &[i64], b: &[i64]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len() as u64;
    if n < 2 {
        return 1.0;
    }
    let mut table: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    let mut rows: BTreeMap<i64, u64> = BTreeMap::new();
    let mut cols: BTreeMap<i64, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| comb2(c)).sum();
    let sa: f64 = rows.values().map(|&c| comb2(c)).sum();
    let sb: f64 = cols.values().map(|&c| comb2(c)).sum();
    let expected = sa * sb / comb2(n);
    let max = (sa + sb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Indices of the other points ordered by Euclidean distance, ties by index.
fn ranked_neighbors(m: &Matrix, i: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = (0..m.rows())
        .filter(|&j| j != i)
        .map(|j| (squared_euclidean(m.row(i), m.row(j)), j))
        .collect();
    d.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    d.into_iter().map(|x| x.1).collect()
}

/// Trustworthiness of a low-dimensional embedding: penalizes points that are
/// among the `k` nearest in `low` but far down the ranking in `high`.
/// Returns `None` unless `1 <= k < n / 2`.
pub fn trustworthiness(high: &Matrix, low: &Matrix, k: usize) -> Option<f64> {
    let n = high.rows();
    assert_eq!(n, low.rows(), "row counts differ");
    if k == 0 || 2 * k >= n {
        return None;
    }
    let mut penalty = 0.0;
    let mut rank = alloc::vec![0usize; n];
    for i in 0..n {
        for (r, j) in ranked_neighbors(high, i).into_iter().enumerate() {
            rank[j] = r + 1;
        }
        for &j in ranked_neighbors(low, i).iter().take(k) {
            if rank[j] > k {
                penalty += (rank[j] - k) as f64;
            }
        }
    }
    let (n, k) = (n as f64, k as f64);
    Some(1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * penalty)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ari_basics() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[5, 5, 3, 3]), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[1, 1, 1]), 1.0);
        // sklearn: adjusted_rand_score([0,0,1,1],[0,0,1,2]) = 0.5714285714285714
        assert!((adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 2]) - 0.5714285714285714).abs() < 1e-12);
        assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
    }

    #[test]
    fn trust_identity_is_one() {
        let m = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 3.0], [5.0, 1.0], [2.0, 7.0]]);
        assert_eq!(trustworthiness(&m, &m, 2), Some(1.0));
        assert_eq!(trustworthiness(&m, &m, 3), None);
    }

    #[test]
    fn trust_penalizes_scrambles() {
        let high = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0], [4.0], [5.0], [6.0], [7.0]]);
        let low = Matrix::from_rows(&[[0.0], [7.0], [2.0], [5.0], [4.0], [3.0], [6.0], [1.0]]);
        let t = trustworthiness(&high, &low, 2).unwrap();
        assert!(t < 1.0 && t > 0.0);
    }
}
