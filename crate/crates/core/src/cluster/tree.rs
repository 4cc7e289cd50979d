//! Single-linkage dendrogram and its condensed form.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::mst::MstEdge;

/// Distances at or below this are treated as this value when converting to
/// lambda, so coincident points get a large finite lambda instead of infinity.
pub const MIN_DISTANCE: f64 = 1e-12;

#[inline]
pub fn lambda_of(distance: f64) -> f64 {
    1.0 / distance.max(MIN_DISTANCE)
}

/// One merge of the dendrogram. Ids below `n` are points, `n + i` is the
/// cluster formed by merge `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        let total = 2 * n - 1;
        UnionFind {
            parent: (0..total).collect(),
            size: (0..total).map(|i| if i < n { 1 } else { 0 }).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }
}

/// Builds the dendrogram by merging along MST edges in ascending order.
pub fn single_linkage(mst: &[MstEdge], n: usize) -> Vec<Merge> {
    if n < 2 {
        return Vec::new();
    }
    let mut uf = UnionFind::new(n);
    let mut merges = Vec::with_capacity(n - 1);
    for (i, e) in mst.iter().enumerate() {
        let (ra, rb) = (uf.find(e.a), uf.find(e.b));
        let (left, right) = (ra.min(rb), ra.max(rb));
        let id = n + i;
        let size = uf.size[left] + uf.size[right];
        uf.parent[left] = id;
        uf.parent[right] = id;
        uf.size[id] = size;
        merges.push(Merge { left, right, distance: e.weight, size });
    }
    merges
}

/// A cluster of the condensed tree. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub birth_lambda: f64,
    /// Lambda of the split into child clusters, or of the last point leaving
    /// for a leaf.
    pub death_lambda: f64,
    pub size: usize,
    pub stability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointExit {
    pub cluster: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensedTree {
    pub nodes: Vec<ClusterNode>,
    pub point_exits: Vec<PointExit>,
}

impl CondensedTree {
    /// A tree whose root never splits; every point leaves it at lambda 0.
    pub fn root_only(n: usize) -> Self {
        CondensedTree {
            nodes: vec![ClusterNode {
                id: 0,
                parent: None,
                children: Vec::new(),
                birth_lambda: 0.0,
                death_lambda: 0.0,
                size: n,
                stability: 0.0,
            }],
            point_exits: vec![PointExit { cluster: 0, lambda: 0.0 }; n],
        }
    }

    pub fn is_leaf(&self, c: usize) -> bool {
        self.nodes[c].children.is_empty()
    }

    /// `c` itself and all clusters below it.
    pub fn descendants(&self, c: usize) -> Vec<usize> {
        let mut out = vec![c];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.nodes[out[i]].children.iter().copied());
            i += 1;
        }
        out
    }
}

/// Walks the dendrogram top-down. Splits where both sides have at least
/// `min_cluster_size` points create two child clusters; smaller sides fall
/// out of the current cluster point by point at `lambda = 1 / distance`.
pub fn condense_tree(merges: &[Merge], n: usize, min_cluster_size: usize) -> CondensedTree {
    let mcs = min_cluster_size.max(1);
    let mut nodes = vec![ClusterNode {
        id: 0,
        parent: None,
        children: Vec::new(),
        birth_lambda: 0.0,
        death_lambda: 0.0,
        size: n,
        stability: 0.0,
    }];
    let mut exits = vec![PointExit { cluster: 0, lambda: 0.0 }; n];
    if n == 0 {
        return CondensedTree { nodes, point_exits: exits };
    }
    if n == 1 {
        // lone point: leaves the root immediately
        return CondensedTree { nodes, point_exits: exits };
    }

    let size_of = |id: usize| if id < n { 1 } else { merges[id - n].size };
    let leaves_under = |id: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                let m = &merges[x - n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    };

    // queue of (dendrogram node, condensed cluster it belongs to)
    let mut queue = VecDeque::new();
    queue.push_back((2 * n - 2, 0usize));
    while let Some((node, cluster)) = queue.pop_front() {
        if node < n {
            // a singleton reached while still inside a cluster can only
            // happen for min_cluster_size <= 1; it leaves at the parent's death
            continue;
        }
        let m = merges[node - n];
        let lambda = lambda_of(m.distance);
        let (ls, rs) = (size_of(m.left), size_of(m.right));
        match (ls >= mcs, rs >= mcs) {
            (true, true) => {
                for (child, size) in [(m.left, ls), (m.right, rs)] {
                    let id = nodes.len();
                    nodes.push(ClusterNode {
                        id,
                        parent: Some(cluster),
                        children: Vec::new(),
                        birth_lambda: lambda,
                        death_lambda: 0.0,
                        size,
                        stability: 0.0,
                    });
                    nodes[cluster].children.push(id);
                    nodes[cluster].death_lambda = lambda;
                    if child < n {
                        exits[child] = PointExit { cluster: id, lambda };
                    } else {
                        queue.push_back((child, id));
                    }
                }
            }
            (false, false) => {
                for side in [m.left, m.right] {
                    for p in leaves_under(side) {
                        exits[p] = PointExit { cluster, lambda };
                    }
                }
            }
            (l_big, _) => {
                let (big, small) = if l_big { (m.left, m.right) } else { (m.right, m.left) };
                for p in leaves_under(small) {
                    exits[p] = PointExit { cluster, lambda };
                }
                if big < n {
                    exits[big] = PointExit { cluster, lambda };
                } else {
                    queue.push_back((big, cluster));
                }
            }
        }
    }

    // leaf death = last point to leave; stability via the capped-exit sum
    for e in &exits {
        let node = &mut nodes[e.cluster];
        if node.children.is_empty() && e.lambda > node.death_lambda {
            node.death_lambda = e.lambda;
        }
    }
    let mut stability = vec![0.0; nodes.len()];
    for e in &exits {
        // a point contributes to every cluster on its path to the root
        let mut c = e.cluster;
        let mut lam = e.lambda;
        loop {
            let node = &nodes[c];
            stability[c] += lam.min(node.death_lambda.max(node.birth_lambda)) - node.birth_lambda;
            match node.parent {
                Some(p) => {
                    lam = node.birth_lambda;
                    c = p;
                }
                None => break,
            }
        }
    }
    for (node, s) in nodes.iter_mut().zip(stability) {
        node.stability = s.max(0.0);
    }
    CondensedTree { nodes, point_exits: exits }
}
