//! Brute-force reference implementations and data generators shared by the
//! integration tests. Nothing here calls into the library's algorithms.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Class-based TF-IDF straight from the definition, keyed by (class, term).
pub fn ctfidf_oracle(docs: &[&str], labels: &[i64], n_classes: usize) -> HashMap<(usize, String), f64> {
    let mut class_text: Vec<Vec<&str>> = vec![Vec::new(); n_classes];
    for (d, &l) in docs.iter().zip(labels) {
        if l >= 0 {
            class_text[l as usize].extend(d.split_whitespace());
        }
    }
    let mut tf: Vec<HashMap<&str, f64>> = vec![HashMap::new(); n_classes];
    let mut f: HashMap<&str, f64> = HashMap::new();
    for (c, words) in class_text.iter().enumerate() {
        for w in words {
            *tf[c].entry(w).or_insert(0.0) += 1.0;
            *f.entry(w).or_insert(0.0) += 1.0;
        }
    }
    let a = class_text.iter().map(|w| w.len() as f64).sum::<f64>() / n_classes as f64;
    let mut out = HashMap::new();
    for (c, row) in tf.iter().enumerate() {
        for (w, &count) in row {
            out.insert((c, w.to_string()), count * (1.0 + a / f[w]).ln());
        }
    }
    out
}

/// Core distance: k-th smallest distance to all points, self included.
pub fn core_oracle(points: &[Vec<f64>], min_samples: usize) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            let mut d: Vec<f64> = points.iter().map(|q| dist(p, q)).collect();
            d.sort_by(f64::total_cmp);
            d[min_samples - 1]
        })
        .collect()
}

pub fn mreach_matrix(points: &[Vec<f64>], core: &[f64]) -> Vec<Vec<f64>> {
    let n = points.len();
    (0..n)
        .map(|i| (0..n).map(|j| dist(&points[i], &points[j]).max(core[i]).max(core[j])).collect())
        .collect()
}

/// O(n^3) Prim: each step scans every (tree, non-tree) pair.
pub fn prim_total(w: &[Vec<f64>]) -> f64 {
    let n = w.len();
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut total = 0.0;
    for _ in 1..n {
        let mut best = (f64::INFINITY, 0);
        for i in (0..n).filter(|&i| in_tree[i]) {
            for j in (0..n).filter(|&j| !in_tree[j]) {
                if w[i][j] < best.0 {
                    best = (w[i][j], j);
                }
            }
        }
        in_tree[best.1] = true;
        total += best.0;
    }
    total
}

/// Kruskal with a naive component relabeling.
pub fn kruskal_total(w: &[Vec<f64>]) -> f64 {
    let n = w.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((w[i][j], i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut comp: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    for (wt, i, j) in edges {
        let (ci, cj) = (comp[i], comp[j]);
        if ci != cj {
            total += wt;
            for c in comp.iter_mut() {
                if *c == cj {
                    *c = ci;
                }
            }
        }
    }
    total
}

/// Connected components of the graph with edges `w <= threshold`.
pub fn components_at(w: &[Vec<f64>], threshold: f64) -> Vec<Vec<usize>> {
    let n = w.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            for v in 0..n {
                if !seen[v] && w[u][v] <= threshold {
                    seen[v] = true;
                    comp.push(v);
                }
            }
            i += 1;
        }
        comp.sort();
        out.push(comp);
    }
    out
}

/// Sweeps every distinct pairwise weight from high to low and returns the
/// largest number of simultaneous components holding at least `mcs`
/// points. A value of 1 means the condensed tree cannot split.
pub fn max_large_components(w: &[Vec<f64>], mcs: usize) -> usize {
    let mut levels: Vec<f64> = w.iter().flatten().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
        .iter()
        .map(|&t| components_at(w, t).iter().filter(|c| c.len() >= mcs).count())
        .max()
        .unwrap_or(0)
}

/// Adjusted Rand index from pair counts over all n(n-1)/2 pairs.
pub fn ari_oracle(a: &[i64], b: &[i64]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let pairs = both + only_a + only_b + neither;
    let same_a = both + only_a;
    let same_b = both + only_b;
    let expected = same_a * same_b / pairs;
    let max = (same_a + same_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

/// Trustworthiness from the textbook definition with Euclidean ranks.
pub fn trustworthiness_oracle(high: &[Vec<f64>], low: &[Vec<f64>], k: usize) -> f64 {
    let n = high.len();
    let order = |pts: &[Vec<f64>], i: usize| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        idx.sort_by(|&x, &y| dist(&pts[i], &pts[x]).total_cmp(&dist(&pts[i], &pts[y])).then(x.cmp(&y)));
        idx
    };
    let mut sum = 0.0;
    for i in 0..n {
        let hi = order(high, i);
        let lo: BTreeSet<usize> = order(low, i).into_iter().take(k).collect();
        for (r, j) in hi.iter().enumerate() {
            if r >= k && lo.contains(j) {
                sum += (r + 1 - k) as f64;
            }
        }
    }
    let (n, k) = (n as f64, k as f64);
    1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * sum
}

/// Isotropic Gaussian blobs; returns points and the blob index of each.
pub fn blobs(centers: &[Vec<f64>], per_blob: usize, sigma: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<i64>) {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut pts = Vec::new();
    let mut truth = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            pts.push(center.iter().map(|x| x + normal.sample(&mut r)).collect());
            truth.push(c as i64);
        }
    }
    (pts, truth)
}

pub fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..n).map(|_| (0..dim).map(|_| r.random::<f64>()).collect()).collect()
}
