use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ReduceError;
use crate::matrix::{Matrix, Metric};

/// Exact k-nearest-neighbor lists, self excluded, ascending by distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnGraph {
    k: usize,
    neighbors: Vec<usize>,
    distances: Vec<f64>,
}

impl KnnGraph {
    /// Assembles a graph from per-point rows, e.g. computed in parallel with
    /// [`knn_row`].
    pub fn from_rows(k: usize, rows: Vec<(Vec<usize>, Vec<f64>)>) -> Self {
        let mut neighbors = Vec::with_capacity(rows.len() * k);
        let mut distances = Vec::with_capacity(rows.len() * k);
        for (nb, d) in rows {
            debug_assert_eq!(nb.len(), k);
            neighbors.extend(nb);
            distances.extend(d);
        }
        KnnGraph { k, neighbors, distances }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.neighbors.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }
}

pub fn check_knn_args(n: usize, k: usize) -> Result<(), ReduceError> {
    if k < 2 {
        return Err(ReduceError::NeighborsTooSmall(k));
    }
    if n <= k {
        return Err(ReduceError::TooFewPoints { n, k });
    }
    Ok(())
}

/// The `k` nearest neighbors of point `i` by brute force. Ties go to the
/// lower index.
pub fn knn_row(points: &Matrix, i: usize, k: usize, metric: Metric) -> (Vec<usize>, Vec<f64>) {
    let p = points.row(i);
    let mut cand: Vec<(f64, usize)> = (0..points.rows())
        .filter(|&j| j != i)
        .map(|j| (metric.distance(p, points.row(j)), j))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if cand.len() > k {
        cand.select_nth_unstable_by(k - 1, cmp);
        cand.truncate(k);
    }
    cand.sort_unstable_by(cmp);
    cand.into_iter().map(|(d, j)| (j, d)).unzip()
}

pub fn build_knn_graph(points: &Matrix, k: usize, metric: Metric) -> Result<KnnGraph, ReduceError> {
    check_knn_args(points.rows(), k)?;
    let rows = (0..points.rows()).map(|i| knn_row(points, i, k, metric)).collect();
    Ok(KnnGraph::from_rows(k, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points() {
        let pts = Matrix::from_rows(&[[0.0], [1.0], [2.0], [10.0]]);
        let g = build_knn_graph(&pts, 2, Metric::Euclidean).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.distances(0), &[1.0, 2.0]);
        assert_eq!(g.neighbors(3), &[2, 1]);
        for i in 0..4 {
            assert!(!g.neighbors(i).contains(&i));
        }
    }

    #[test]
    fn ties_prefer_lower_index() {
        let pts = Matrix::from_rows(&[[0.0], [-1.0], [1.0], [5.0]]);
        let g = build_knn_graph(&pts, 2, Metric::Euclidean).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2]);
    }

    #[test]
    fn rejects_small_inputs() {
        let pts = Matrix::from_rows(&[[0.0], [1.0], [2.0]]);
        assert_eq!(build_knn_graph(&pts, 3, Metric::Euclidean), Err(ReduceError::TooFewPoints { n: 3, k: 3 }));
        assert_eq!(build_knn_graph(&pts, 1, Metric::Euclidean), Err(ReduceError::NeighborsTooSmall(1)));
    }
}
