//! Density clustering (HDBSCAN): core distances, mutual-reachability MST,
//! condensed tree, excess-of-mass selection, and soft memberships.

pub mod mst;
pub mod select;
pub mod soft;
pub mod tree;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use mst::{build_mst, core_distances, mutual_reachability, MstEdge};
pub use select::{select_clusters_eom, ClusterAssignment};
pub use soft::membership_vectors;
pub use tree::{condense_tree, single_linkage, CondensedTree};

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusterError {
    #[error("need more points than min_samples: n = {n}, min_samples = {min_samples}")]
    TooFewPoints { n: usize, min_samples: usize },
    #[error("min_samples must be at least 1, got {0}")]
    MinSamples(usize),
    #[error("min_cluster_size must be at least 2, got {0}")]
    MinClusterSize(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
    /// Lets the root be selected when it beats its children. Off by default,
    /// so a single blob with no internal split ends up all noise.
    pub allow_single_cluster: bool,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams { min_cluster_size: 10, min_samples: 10, allow_single_cluster: false }
    }
}

impl DensityParams {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.min_cluster_size < 2 {
            return Err(ClusterError::MinClusterSize(self.min_cluster_size));
        }
        if self.min_samples < 1 {
            return Err(ClusterError::MinSamples(self.min_samples));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterWarning {
    /// Fewer points than `min_cluster_size`; everything is noise.
    TooFewForClusters { n: usize, min_cluster_size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub assignment: ClusterAssignment,
    pub tree: CondensedTree,
    /// Condensed-tree ids of the selected clusters, in label order.
    pub selected: Vec<usize>,
    pub warnings: Vec<ClusterWarning>,
}

impl Clustering {
    pub fn memberships(&self, points: &Matrix) -> Vec<Vec<f64>> {
        membership_vectors(points, &self.tree, &self.selected, &self.assignment)
    }
}

/// Runs the whole pipeline from precomputed core distances; the std crate
/// uses this after computing cores in parallel.
pub fn cluster_with_cores(points: &Matrix, core: &[f64], params: &DensityParams) -> Clustering {
    let n = points.rows();
    let mst = build_mst(points, core);
    let tree = condense_tree(&single_linkage(&mst, n), n, params.min_cluster_size);
    let selected = select::eom_selection(&tree, params.allow_single_cluster);
    let assignment = select::assign_points(&tree, &selected);
    Clustering { assignment, tree, selected, warnings: Vec::new() }
}

pub fn cluster(points: &Matrix, params: &DensityParams) -> Result<Clustering, ClusterError> {
    params.validate()?;
    let n = points.rows();
    if n < params.min_cluster_size {
        return Ok(Clustering {
            assignment: ClusterAssignment::all_noise(n),
            tree: CondensedTree::root_only(n),
            selected: Vec::new(),
            warnings: alloc::vec![ClusterWarning::TooFewForClusters {
                n,
                min_cluster_size: params.min_cluster_size,
            }],
        });
    }
    let core = core_distances(points, params.min_samples)?;
    Ok(cluster_with_cores(points, &core, params))
}
