//! Stochastic layout of a fuzzy graph in low dimension.
//!
//! Edges are sampled in proportion to their weight through a per-edge epoch
//! schedule: an edge of weight `w` fires every `w_max / w` epochs. Each firing
//! pulls both endpoints together and pushes the head away from
//! `neg_samples / epochs_per_sample` uniformly drawn vertices. Gradients are
//! clipped to `[-4, 4]` and the learning rate decays linearly to zero.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::fuzzy::FuzzyGraph;
use super::ReduceError;
use crate::matrix::Matrix;

const GRAD_CLIP: f64 = 4.0;
const REPULSION_EPS: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub n_components: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub a: f64,
    pub b: f64,
    pub epochs: usize,
    pub seed: u64,
    pub neg_samples: usize,
    pub learning_rate: f64,
}

impl LayoutParams {
    /// Epoch count used when none is configured: fewer passes for large graphs.
    pub fn default_epochs(n: usize) -> usize {
        if n > 10_000 {
            200
        } else {
            500
        }
    }
}

/// Coordinate storage the optimizer writes through. Implemented for plain
/// slices here; the std crate provides an atomic store for lock-free
/// multi-worker runs.
pub trait CoordStore {
    fn get(&self, idx: usize) -> f64;
    fn set(&mut self, idx: usize, v: f64);
}

impl CoordStore for [f64] {
    #[inline]
    fn get(&self, idx: usize) -> f64 {
        self[idx]
    }
    #[inline]
    fn set(&mut self, idx: usize, v: f64) {
        self[idx] = v;
    }
}

/// Directed edge list and sampling schedule derived from a fuzzy graph.
#[derive(Debug, Clone)]
pub struct LayoutPlan {
    pub head: Vec<usize>,
    pub tail: Vec<usize>,
    pub epochs_per_sample: Vec<f64>,
    pub n_vertices: usize,
    pub params: LayoutParams,
}

/// Mutable per-edge timers for one contiguous range of edges.
#[derive(Debug, Clone)]
pub struct EdgeTimers {
    next_sample: Vec<f64>,
    next_negative: Vec<f64>,
    per_negative: Vec<f64>,
}

impl LayoutPlan {
    /// Drops edges lighter than `w_max / epochs` (they would never fire).
    pub fn new(g: &FuzzyGraph, params: LayoutParams) -> Result<Self, ReduceError> {
        if g.nnz() == 0 {
            return Err(ReduceError::EmptyGraph);
        }
        let w_max = g.entries().map(|e| e.2).fold(0.0, f64::max);
        let floor = w_max / params.epochs as f64;
        let mut head = Vec::new();
        let mut tail = Vec::new();
        let mut eps = Vec::new();
        for (i, j, w) in g.entries() {
            if w >= floor {
                head.push(i);
                tail.push(j);
                eps.push(w_max / w);
            }
        }
        Ok(LayoutPlan { head, tail, epochs_per_sample: eps, n_vertices: g.n(), params })
    }

    pub fn n_edges(&self) -> usize {
        self.head.len()
    }

    pub fn timers(&self, edges: Range<usize>) -> EdgeTimers {
        let neg = self.params.neg_samples.max(1) as f64;
        let next_sample = self.epochs_per_sample[edges.clone()].to_vec();
        let per_negative: Vec<f64> = next_sample.iter().map(|e| e / neg).collect();
        EdgeTimers { next_sample, next_negative: per_negative.clone(), per_negative }
    }

    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.params.learning_rate * (1.0 - epoch as f64 / self.params.epochs as f64)
    }

    /// Runs one epoch over `edges`. `timers` must come from
    /// `self.timers(edges)`.
    pub fn run_epoch<C: CoordStore + ?Sized, R: RngCore>(
        &self,
        epoch: usize,
        edges: Range<usize>,
        timers: &mut EdgeTimers,
        coords: &mut C,
        rng: &mut R,
    ) -> Result<(), ReduceError> {
        let p = &self.params;
        let dim = p.n_components;
        let (a, b) = (p.a, p.b);
        let alpha = self.learning_rate(epoch);
        let e = epoch as f64;
        let mut cur = vec![0.0; dim];
        let mut oth = vec![0.0; dim];
        for (local, edge) in edges.enumerate() {
            if timers.next_sample[local] > e {
                continue;
            }
            let j = self.head[edge];
            let k = self.tail[edge];
            for d in 0..dim {
                cur[d] = coords.get(j * dim + d);
                oth[d] = coords.get(k * dim + d);
            }
            let dist2: f64 = cur.iter().zip(&oth).map(|(x, y)| (x - y) * (x - y)).sum();
            let coeff = if dist2 > 0.0 {
                let pb = libm::pow(dist2, b);
                -2.0 * a * b * libm::pow(dist2, b - 1.0) / (a * pb + 1.0)
            } else {
                0.0
            };
            for d in 0..dim {
                let g = (coeff * (cur[d] - oth[d])).clamp(-GRAD_CLIP, GRAD_CLIP);
                cur[d] += g * alpha;
                oth[d] -= g * alpha;
            }
            for d in 0..dim {
                coords.set(j * dim + d, cur[d]);
                coords.set(k * dim + d, oth[d]);
            }
            timers.next_sample[local] += self.epochs_per_sample[edge];

            let n_neg = ((e - timers.next_negative[local]) / timers.per_negative[local]).max(0.0) as usize;
            for _ in 0..n_neg {
                let other = rng.random_range(0..self.n_vertices);
                if other == j {
                    continue;
                }
                for d in 0..dim {
                    oth[d] = coords.get(other * dim + d);
                }
                let dist2: f64 = cur.iter().zip(&oth).map(|(x, y)| (x - y) * (x - y)).sum();
                if dist2 <= 0.0 {
                    continue;
                }
                let coeff = 2.0 * b / ((REPULSION_EPS + dist2) * (a * libm::pow(dist2, b) + 1.0));
                for d in 0..dim {
                    let g = (coeff * (cur[d] - oth[d])).clamp(-GRAD_CLIP, GRAD_CLIP);
                    cur[d] += g * alpha;
                }
            }
            for d in 0..dim {
                if !cur[d].is_finite() || !oth[d].is_finite() {
                    return Err(ReduceError::NonFinite { epoch, edge });
                }
                coords.set(j * dim + d, cur[d]);
            }
            timers.next_negative[local] += n_neg as f64 * timers.per_negative[local];
        }
        Ok(())
    }
}

/// Whether the layout started from the spectral embedding or from random
/// positions (disconnected graphs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitKind {
    Spectral,
    Random,
}

/// Initial positions rescaled to `[0, 10]` per column.
pub fn initial_layout(g: &FuzzyGraph, dim: usize, seed: u64) -> (Matrix, InitKind) {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1a40);
    let (n_comp, _) = g.components();
    let (mut m, kind) = if n_comp == 1 && n > dim + 1 {
        let mut m = spectral_layout(g, dim, &mut rng);
        // tiny jitter breaks exact ties between structurally equivalent vertices
        let max_abs = m.as_slice().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let scale = if max_abs > 0.0 { 10.0 / max_abs } else { 1.0 };
        let noise = Normal::new(0.0, 1e-4).expect("valid normal");
        for v in m.as_mut_slice() {
            *v = *v * scale + noise.sample(&mut rng);
        }
        (m, InitKind::Spectral)
    } else {
        let mut m = Matrix::zeros(n, dim);
        for v in m.as_mut_slice() {
            *v = rng.random_range(-10.0..10.0);
        }
        (m, InitKind::Random)
    };
    rescale_columns(&mut m, 10.0);
    (m, kind)
}

fn rescale_columns(m: &mut Matrix, extent: f64) {
    let (rows, cols) = (m.rows(), m.cols());
    for c in 0..cols {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in 0..rows {
            let v = m.row(r)[c];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = hi - lo;
        for r in 0..rows {
            let v = &mut m.row_mut(r)[c];
            *v = if span > 0.0 { extent * (*v - lo) / span } else { 0.0 };
        }
    }
}

/// Eigenvectors of the normalized adjacency `D^-1/2 W D^-1/2` for the
/// largest eigenvalues after the trivial one, by orthogonal (subspace)
/// iteration on the shifted operator `(I + M) / 2`.
pub fn spectral_layout<R: RngCore>(g: &FuzzyGraph, dim: usize, rng: &mut R) -> Matrix {
    let n = g.n();
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| {
            let d = g.degree(i);
            if d > 0.0 {
                1.0 / libm::sqrt(d)
            } else {
                0.0
            }
        })
        .collect();
    let mut trivial: Vec<f64> = (0..n).map(|i| libm::sqrt(g.degree(i))).collect();
    normalize(&mut trivial);

    let mut basis: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut basis, &trivial);

    let apply = |v: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let mut acc = 0.0;
            for &(j, w) in g.row(i) {
                acc += w * inv_sqrt_deg[j] * v[j];
            }
            out[i] = 0.5 * (v[i] + inv_sqrt_deg[i] * acc);
        }
    };

    let mut next = vec![vec![0.0; n]; dim];
    for _ in 0..1000 {
        for (v, out) in basis.iter().zip(next.iter_mut()) {
            apply(v, out);
        }
        orthonormalize(&mut next, &trivial);
        let delta: f64 = basis
            .iter()
            .zip(&next)
            .map(|(a, b)| 1.0 - libm::fabs(dot(a, b)))
            .fold(0.0, f64::max);
        core::mem::swap(&mut basis, &mut next);
        if delta < 1e-10 {
            break;
        }
    }

    let mut m = Matrix::zeros(n, dim);
    for (c, v) in basis.iter().enumerate() {
        for r in 0..n {
            m.row_mut(r)[c] = v[r];
        }
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = libm::sqrt(dot(v, v));
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Modified Gram-Schmidt against `fixed` and then in order.
fn orthonormalize(basis: &mut [Vec<f64>], fixed: &[f64]) {
    for i in 0..basis.len() {
        let (done, rest) = basis.split_at_mut(i);
        let v = &mut rest[0];
        let p = dot(v, fixed);
        v.iter_mut().zip(fixed).for_each(|(x, f)| *x -= p * f);
        for u in done.iter() {
            let p = dot(v, u);
            v.iter_mut().zip(u).for_each(|(x, f)| *x -= p * f);
        }
        normalize(v);
    }
}

/// Single-worker optimization. Deterministic for a fixed seed.
pub fn optimize_layout(g: &FuzzyGraph, params: &LayoutParams) -> Result<(Matrix, InitKind), ReduceError> {
    let plan = LayoutPlan::new(g, *params)?;
    let (mut coords, init) = initial_layout(g, params.n_components, params.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut timers = plan.timers(0..plan.n_edges());
    for epoch in 0..params.epochs {
        plan.run_epoch(epoch, 0..plan.n_edges(), &mut timers, coords.as_mut_slice(), &mut rng)?;
    }
    Ok((coords, init))
}
