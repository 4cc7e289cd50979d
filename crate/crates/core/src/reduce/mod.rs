//! Manifold dimensionality reduction (UMAP): kNN graph, fuzzy simplicial
//! set, curve fit, and stochastic layout.

pub mod curve;
pub mod fuzzy;
pub mod knn;
pub mod layout;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use curve::{fit_layout_params, CurveFit};
pub use fuzzy::{fuzzy_union, smooth_knn, FuzzyGraph, FuzzySets, MIN_SIGMA};
pub use knn::{build_knn_graph, knn_row, KnnGraph};
pub use layout::{optimize_layout, CoordStore, InitKind, LayoutParams, LayoutPlan};

use crate::matrix::{Matrix, Metric};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReduceError {
    #[error("need more points than neighbors: n = {n}, k = {k}")]
    TooFewPoints { n: usize, k: usize },
    #[error("n_neighbors must be at least 2, got {0}")]
    NeighborsTooSmall(usize),
    #[error("invalid curve arguments: min_dist = {min_dist}, spread = {spread}")]
    CurveArgs { min_dist: f64, spread: f64 },
    #[error("curve fit did not converge for min_dist = {min_dist}, spread = {spread} (last a = {a}, b = {b})")]
    CurveFit { min_dist: f64, spread: f64, a: f64, b: f64 },
    #[error("fuzzy graph has no edges")]
    EmptyGraph,
    #[error("non-finite coordinate at epoch {epoch}, edge {edge}")]
    NonFinite { epoch: usize, edge: usize },
    #[error("n_components must be positive")]
    ZeroComponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReduceConfig {
    pub n_neighbors: usize,
    pub n_components: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub metric: Metric,
    /// `None` picks [`LayoutParams::default_epochs`].
    pub epochs: Option<usize>,
    pub neg_samples: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig {
            n_neighbors: 15,
            n_components: 5,
            min_dist: 0.0,
            spread: 1.0,
            metric: Metric::Cosine,
            epochs: None,
            neg_samples: 5,
            learning_rate: 1.0,
            seed: 42,
        }
    }
}

impl ReduceConfig {
    pub fn layout_params(&self, n: usize) -> Result<LayoutParams, ReduceError> {
        if self.n_components == 0 {
            return Err(ReduceError::ZeroComponents);
        }
        let fit = fit_layout_params(self.min_dist, self.spread)?;
        Ok(LayoutParams {
            n_components: self.n_components,
            min_dist: self.min_dist,
            spread: self.spread,
            a: fit.a,
            b: fit.b,
            epochs: self.epochs.unwrap_or_else(|| LayoutParams::default_epochs(n)),
            seed: self.seed,
            neg_samples: self.neg_samples,
            learning_rate: self.learning_rate,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub embedding: Matrix,
    pub init: InitKind,
    /// Number of connected components in the fuzzy graph.
    pub components: usize,
    /// Rows whose bandwidth fell back to [`MIN_SIGMA`].
    pub degenerate_rows: Vec<usize>,
}

/// Points are L2-normalized first when the metric is cosine.
pub fn prepare_points(points: &Matrix, metric: Metric) -> Matrix {
    let mut p = points.clone();
    if metric == Metric::Cosine {
        p.normalize_rows();
    }
    p
}

/// Builds the fuzzy graph for `points`; shared by the single- and
/// multi-worker paths.
pub fn fuzzy_graph_from_knn(g: &KnnGraph) -> (FuzzyGraph, FuzzySets) {
    let sets = smooth_knn(g);
    (fuzzy_union(&sets, g), sets)
}

pub fn reduce(points: &Matrix, config: &ReduceConfig) -> Result<Reduction, ReduceError> {
    let p = prepare_points(points, config.metric);
    let knn = build_knn_graph(&p, config.n_neighbors, config.metric)?;
    let (graph, sets) = fuzzy_graph_from_knn(&knn);
    let params = config.layout_params(points.rows())?;
    let (components, _) = graph.components();
    let (embedding, init) = optimize_layout(&graph, &params)?;
    Ok(Reduction { embedding, init, components, degenerate_rows: sets.degenerate })
}
