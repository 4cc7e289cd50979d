use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::CondensedTree;

/// Per-document topic label (`-1` = noise) and membership strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<i64>,
    pub strengths: Vec<f64>,
    pub n_clusters: usize,
}

impl ClusterAssignment {
    pub fn all_noise(n: usize) -> Self {
        ClusterAssignment { labels: vec![-1; n], strengths: vec![0.0; n], n_clusters: 0 }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    /// Member count per cluster label.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_clusters];
        for &l in &self.labels {
            if l >= 0 {
                c[l as usize] += 1;
            }
        }
        c
    }

    /// Indices of documents labeled `label`.
    pub fn members(&self, label: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label as i64)
            .map(|(i, _)| i)
            .collect()
    }

    /// Checks label contiguity and the noise/strength correspondence.
    pub fn is_consistent(&self) -> bool {
        let labels_ok = self.labels.iter().all(|&l| l == -1 || (l >= 0 && (l as usize) < self.n_clusters));
        let used = self.counts().iter().all(|&c| c > 0);
        let strengths_ok = self.labels.iter().zip(&self.strengths).all(|(&l, &s)| {
            (0.0..=1.0).contains(&s) && ((l == -1) == (s == 0.0))
        });
        labels_ok && used && strengths_ok && self.labels.len() == self.strengths.len()
    }
}

/// Clusters chosen by excess of mass, in condensed-node order.
pub fn eom_selection(tree: &CondensedTree, allow_single_cluster: bool) -> Vec<usize> {
    let m = tree.nodes.len();
    let mut selected = vec![false; m];
    let mut subtree = vec![0.0; m];
    // children always have larger ids than parents
    for c in (0..m).rev() {
        let node = &tree.nodes[c];
        let is_root = node.parent.is_none();
        if node.children.is_empty() {
            subtree[c] = node.stability;
            selected[c] = !is_root || allow_single_cluster;
            continue;
        }
        let child_sum: f64 = node.children.iter().map(|&ch| subtree[ch]).sum();
        if (!is_root || allow_single_cluster) && node.stability > child_sum {
            selected[c] = true;
            subtree[c] = node.stability;
            for d in tree.descendants(c).into_iter().skip(1) {
                selected[d] = false;
            }
        } else {
            subtree[c] = child_sum;
        }
    }
    (0..m).filter(|&c| selected[c]).collect()
}

/// Labels each point by the selected cluster above its exit node, with
/// strength `exit_lambda / max exit_lambda` within that cluster.
pub fn assign_points(tree: &CondensedTree, selected: &[usize]) -> ClusterAssignment {
    let m = tree.nodes.len();
    let mut label_of = vec![-1i64; m];
    for (label, &c) in selected.iter().enumerate() {
        for d in tree.descendants(c) {
            label_of[d] = label as i64;
        }
    }
    let n = tree.point_exits.len();
    let mut labels = vec![-1i64; n];
    let mut max_lambda = vec![0.0f64; selected.len()];
    for (i, e) in tree.point_exits.iter().enumerate() {
        let l = label_of[e.cluster];
        labels[i] = l;
        if l >= 0 {
            max_lambda[l as usize] = max_lambda[l as usize].max(e.lambda);
        }
    }
    let strengths = tree
        .point_exits
        .iter()
        .zip(&labels)
        .map(|(e, &l)| {
            if l < 0 {
                return 0.0;
            }
            let mx = max_lambda[l as usize];
            if mx > 0.0 {
                (e.lambda / mx).clamp(f64::MIN_POSITIVE, 1.0)
            } else {
                1.0
            }
        })
        .collect();
    ClusterAssignment { labels, strengths, n_clusters: selected.len() }
}

pub fn select_clusters_eom(tree: &CondensedTree, allow_single_cluster: bool) -> ClusterAssignment {
    let selected = eom_selection(tree, allow_single_cluster);
    assign_points(tree, &selected)
}
