//! Multi-worker versions of the heavy numeric stages. With one worker each
//! function defers to the single-threaded core path, which is
//! deterministic for a fixed seed.

use std::ops::Range;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Barrier, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use topicflow_core::cluster::mst::core_distance;
use topicflow_core::cluster::{self, ClusterError, Clustering};
use topicflow_core::matrix::{Matrix, Metric};
use topicflow_core::reduce::knn::check_knn_args;
use topicflow_core::reduce::layout::initial_layout;
use topicflow_core::reduce::{
    self, fuzzy_graph_from_knn, knn_row, optimize_layout, prepare_points, CoordStore, FuzzyGraph, InitKind, KnnGraph,
    LayoutParams, LayoutPlan, ReduceConfig, ReduceError, Reduction,
};
use topicflow_core::DensityParams;

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool")
}

pub fn knn_graph(points: &Matrix, k: usize, metric: Metric, workers: usize) -> Result<KnnGraph, ReduceError> {
    if workers <= 1 {
        return reduce::build_knn_graph(points, k, metric);
    }
    check_knn_args(points.rows(), k)?;
    let rows = pool(workers).install(|| (0..points.rows()).into_par_iter().map(|i| knn_row(points, i, k, metric)).collect());
    Ok(KnnGraph::from_rows(k, rows))
}

/// Coordinates shared between layout workers. Reads and writes are
/// individually atomic but unsynchronized, so concurrent updates to the same
/// vertex may interleave.
struct SharedCoords<'a>(&'a [AtomicU64]);

impl CoordStore for SharedCoords<'_> {
    #[inline]
    fn get(&self, idx: usize) -> f64 {
        f64::from_bits(self.0[idx].load(Ordering::Relaxed))
    }
    #[inline]
    fn set(&mut self, idx: usize, v: f64) {
        self.0[idx].store(v.to_bits(), Ordering::Relaxed);
    }
}

fn edge_ranges(m: usize, workers: usize) -> Vec<Range<usize>> {
    let chunk = m.div_ceil(workers.max(1)).max(1);
    (0..m).step_by(chunk).map(|s| s..(s + chunk).min(m)).collect()
}

/// Layout optimization with edges split across workers. Workers stay in
/// step per epoch but otherwise update coordinates lock-free, so results
/// vary between runs.
pub fn optimize_layout_parallel(
    g: &FuzzyGraph,
    params: &LayoutParams,
    workers: usize,
) -> Result<(Matrix, InitKind), ReduceError> {
    if workers <= 1 {
        return optimize_layout(g, params);
    }
    let plan = LayoutPlan::new(g, *params)?;
    let (coords, init) = initial_layout(g, params.n_components, params.seed);
    let shared: Vec<AtomicU64> = coords.as_slice().iter().map(|v| AtomicU64::new(v.to_bits())).collect();
    let ranges = edge_ranges(plan.n_edges(), workers);
    let barrier = Barrier::new(ranges.len());
    let failed = AtomicBool::new(false);
    let error: Mutex<Option<ReduceError>> = Mutex::new(None);

    std::thread::scope(|s| {
        for (w, range) in ranges.iter().cloned().enumerate() {
            let (plan, shared, barrier, failed, error) = (&plan, &shared, &barrier, &failed, &error);
            s.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(w as u64 + 1));
                let mut timers = plan.timers(range.clone());
                let mut store = SharedCoords(shared);
                for epoch in 0..params.epochs {
                    if !failed.load(Ordering::Relaxed) {
                        if let Err(e) = plan.run_epoch(epoch, range.clone(), &mut timers, &mut store, &mut rng) {
                            failed.store(true, Ordering::Relaxed);
                            error.lock().unwrap().get_or_insert(e);
                        }
                    }
                    barrier.wait();
                }
            });
        }
    });
    if let Some(e) = error.into_inner().unwrap() {
        return Err(e);
    }
    let data = shared.into_iter().map(|a| f64::from_bits(a.into_inner())).collect();
    Ok((Matrix::from_vec(coords.rows(), coords.cols(), data), init))
}

pub fn reduce_parallel(points: &Matrix, config: &ReduceConfig, workers: usize) -> Result<Reduction, ReduceError> {
    if workers <= 1 {
        return reduce::reduce(points, config);
    }
    let p = prepare_points(points, config.metric);
    let knn = knn_graph(&p, config.n_neighbors, config.metric, workers)?;
    let (graph, sets) = fuzzy_graph_from_knn(&knn);
    let params = config.layout_params(points.rows())?;
    let (components, _) = graph.components();
    let (embedding, init) = optimize_layout_parallel(&graph, &params, workers)?;
    Ok(Reduction { embedding, init, components, degenerate_rows: sets.degenerate })
}

/// Density clustering with core distances computed in parallel. The result
/// is identical to the single-worker path.
pub fn cluster_parallel(points: &Matrix, params: &DensityParams, workers: usize) -> Result<Clustering, ClusterError> {
    let n = points.rows();
    if workers <= 1 || n < params.min_cluster_size {
        return cluster::cluster(points, params);
    }
    params.validate()?;
    if n <= params.min_samples {
        return Err(ClusterError::TooFewPoints { n, min_samples: params.min_samples });
    }
    let core: Vec<f64> =
        pool(workers).install(|| (0..n).into_par_iter().map(|i| core_distance(points, i, params.min_samples)).collect());
    Ok(cluster::cluster_with_cores(points, &core, params))
}
