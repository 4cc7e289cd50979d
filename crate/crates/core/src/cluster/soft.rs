//! Soft topic memberships: how close each point is to every selected
//! cluster's exemplars.

use alloc::vec;
use alloc::vec::Vec;

use super::select::ClusterAssignment;
use super::tree::CondensedTree;
use crate::matrix::{euclidean, Matrix};

/// Exemplars of a selected cluster: in each leaf cluster beneath it, the
/// points that leave last (at the leaf's maximum lambda).
pub fn exemplars(tree: &CondensedTree, selected: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for leaf in tree.descendants(selected).into_iter().filter(|&c| tree.is_leaf(c)) {
        let max = tree
            .point_exits
            .iter()
            .filter(|e| e.cluster == leaf)
            .map(|e| e.lambda)
            .fold(f64::NEG_INFINITY, f64::max);
        out.extend(
            tree.point_exits
                .iter()
                .enumerate()
                .filter(|(_, e)| e.cluster == leaf && e.lambda == max)
                .map(|(i, _)| i),
        );
    }
    out.sort_unstable();
    out
}

/// Row `i` is a probability vector over the selected clusters, proportional
/// to inverse distance to the nearest exemplar of each; a point sitting on
/// exemplars splits its mass evenly among those clusters. Empty rows when
/// there are no clusters.
pub fn membership_vectors(
    points: &Matrix,
    tree: &CondensedTree,
    selected: &[usize],
    assignment: &ClusterAssignment,
) -> Vec<Vec<f64>> {
    debug_assert_eq!(selected.len(), assignment.n_clusters);
    let ex: Vec<Vec<usize>> = selected.iter().map(|&c| exemplars(tree, c)).collect();
    (0..points.rows())
        .map(|i| {
            let p = points.row(i);
            let dists: Vec<f64> = ex
                .iter()
                .map(|set| {
                    set.iter()
                        .map(|&e| euclidean(p, points.row(e)))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let zeros = dists.iter().filter(|&&d| d == 0.0).count();
            if zeros > 0 {
                return dists.iter().map(|&d| if d == 0.0 { 1.0 / zeros as f64 } else { 0.0 }).collect();
            }
            let inv: Vec<f64> = dists.iter().map(|d| 1.0 / d).collect();
            let total: f64 = inv.iter().sum();
            if total > 0.0 && total.is_finite() {
                inv.iter().map(|v| v / total).collect()
            } else {
                vec![0.0; dists.len()]
            }
        })
        .collect()
}
