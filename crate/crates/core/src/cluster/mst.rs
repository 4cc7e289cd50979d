use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ClusterError;
use crate::matrix::{euclidean, Matrix};

/// Distance from each point to its `min_samples`-th nearest neighbor, the
/// point itself counting as the first (at distance zero).
pub fn core_distances(points: &Matrix, min_samples: usize) -> Result<Vec<f64>, ClusterError> {
    let n = points.rows();
    if min_samples == 0 {
        return Err(ClusterError::MinSamples(0));
    }
    if n <= min_samples {
        return Err(ClusterError::TooFewPoints { n, min_samples });
    }
    Ok((0..n).map(|i| core_distance(points, i, min_samples)).collect())
}

/// Core distance of a single point; exposed for parallel callers.
pub fn core_distance(points: &Matrix, i: usize, min_samples: usize) -> f64 {
    let p = points.row(i);
    let mut d: Vec<f64> = (0..points.rows()).map(|j| euclidean(p, points.row(j))).collect();
    let kth = min_samples - 1;
    let (_, v, _) = d.select_nth_unstable_by(kth, f64::total_cmp);
    *v
}

#[inline]
pub fn mutual_reachability(dist: f64, core_a: f64, core_b: f64) -> f64 {
    dist.max(core_a).max(core_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Dense Prim's algorithm over mutual-reachability distances. Ties on the
/// frontier go to the lowest vertex index; the output is sorted by
/// `(weight, min(a, b), max(a, b))`.
pub fn build_mst(points: &Matrix, core: &[f64]) -> Vec<MstEdge> {
    let n = points.rows();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let pc = points.row(current);
        let mut next = usize::MAX;
        let mut next_w = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let w = mutual_reachability(euclidean(pc, points.row(j)), core[current], core[j]);
            if w < best[j] {
                best[j] = w;
                from[j] = current;
            }
            if best[j] < next_w {
                next_w = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        let (a, b) = (from[next].min(next), from[next].max(next));
        edges.push(MstEdge { a, b, weight: next_w });
        current = next;
    }
    sort_edges(&mut edges);
    edges
}

pub fn sort_edges(edges: &mut [MstEdge]) {
    edges.sort_by(|x, y| {
        x.weight
            .total_cmp(&y.weight)
            .then(x.a.cmp(&y.a))
            .then(x.b.cmp(&y.b))
    });
}
