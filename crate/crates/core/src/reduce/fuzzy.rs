use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::knn::KnnGraph;

/// Bandwidth used when a row's neighbors all sit at distance `rho`
/// (duplicate points) and no finite bandwidth reaches the target sum.
pub const MIN_SIGMA: f64 = 1e-3;

const SIGMA_TOL: f64 = 1e-5;
const MAX_BISECT: usize = 200;

/// Per-point local calibration of the kNN graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzySets {
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `n x k`, aligned with the kNN neighbor lists.
    pub memberships: Vec<f64>,
    pub k: usize,
    /// Rows that fell back to [`MIN_SIGMA`].
    pub degenerate: Vec<usize>,
}

impl FuzzySets {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.memberships[i * self.k..(i + 1) * self.k]
    }
}

fn membership_sum(dists: &[f64], rho: f64, sigma: f64) -> f64 {
    dists.iter().map(|&d| libm::exp(-(d - rho).max(0.0) / sigma)).sum()
}

/// Solves `sum_j exp(-max(0, d_j - rho) / sigma) = target` for sigma by
/// bracketing and bisection. Returns `None` when the left limit of the sum
/// already reaches the target.
pub fn solve_sigma(dists: &[f64], rho: f64, target: f64) -> Option<f64> {
    let at_rho = dists.iter().filter(|&&d| d <= rho).count() as f64;
    if at_rho >= target {
        return None;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while membership_sum(dists, rho, hi) < target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    let mut mid = hi;
    for _ in 0..MAX_BISECT {
        mid = 0.5 * (lo + hi);
        let s = membership_sum(dists, rho, mid);
        if libm::fabs(s - target) < SIGMA_TOL {
            break;
        }
        if s < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Some(mid)
}

pub fn smooth_knn(g: &KnnGraph) -> FuzzySets {
    let k = g.k();
    let target = libm::log2(k as f64);
    let n = g.len();
    let mut rho = vec![0.0; n];
    let mut sigma = vec![MIN_SIGMA; n];
    let mut memberships = vec![0.0; n * k];
    let mut degenerate = Vec::new();
    for i in 0..n {
        let d = g.distances(i);
        rho[i] = d.iter().copied().find(|&x| x > 0.0).unwrap_or(0.0);
        match solve_sigma(d, rho[i], target) {
            Some(s) => sigma[i] = s,
            None => degenerate.push(i),
        }
        for (m, &dij) in memberships[i * k..(i + 1) * k].iter_mut().zip(d) {
            *m = libm::exp(-(dij - rho[i]).max(0.0) / sigma[i]);
        }
    }
    FuzzySets { rho, sigma, memberships, k, degenerate }
}

/// Symmetric sparse weight graph. Rows are sorted by column and hold only
/// positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyGraph {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl FuzzyGraph {
    pub fn from_undirected(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows = vec![Vec::new(); n];
        for (i, j, w) in edges {
            if w > 0.0 && i != j {
                rows[i].push((j, w));
                rows[j].push((i, w));
            }
        }
        for r in rows.iter_mut() {
            r.sort_unstable_by_key(|e| e.0);
        }
        FuzzyGraph { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |e| e.0)
            .map_or(0.0, |p| self.rows[i][p].1)
    }

    /// Every stored entry, both directions, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, w)| (i, j, w)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|e| e.1).sum()
    }

    /// Connected-component id per vertex, numbered by lowest member.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut comp = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(u, _) in &self.rows[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = count;
                        stack.push(u);
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }
}

/// Probabilistic t-conorm of the two directed memberships:
/// `w_ij + w_ji - w_ij * w_ji`, with a missing direction counting as zero.
pub fn fuzzy_union(f: &FuzzySets, g: &KnnGraph) -> FuzzyGraph {
    let mut pairs: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for i in 0..g.len() {
        for (&j, &w) in g.neighbors(i).iter().zip(f.row(i)) {
            if i == j {
                continue;
            }
            let e = pairs.entry((i.min(j), i.max(j))).or_insert((0.0, 0.0));
            if i < j {
                e.0 = w;
            } else {
                e.1 = w;
            }
        }
    }
    FuzzyGraph::from_undirected(
        g.len(),
        pairs.into_iter().map(|((i, j), (a, b))| (i, j, a + b - a * b)),
    )
}
