// SPDX-License-Identifier: Apache-2.0

//! Recursive cone-shape similarity over a hash-consed shape arena.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::graph::{ConeTree, NodeKind};
use crate::netlist::{Driver, NetId, NetlistIndex};

/// How children of two nodes are paired up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Matching {
    /// Descending similarity, ties by child position.
    #[default]
    Greedy,
    /// Maximum-weight assignment.
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Shape {
    kind: NodeKind,
    children: Vec<u32>,
}

/// Interned cone shapes with memoized pairwise similarity.
#[derive(Debug, Default)]
pub struct ShapeArena {
    shapes: Vec<Shape>,
    digests: Vec<u64>,
    intern: HashMap<Shape, u32>,
    sim: HashMap<(u32, u32), f64>,
    matching: Matching,
}

impl ShapeArena {
    pub fn new(matching: Matching) -> Self {
        ShapeArena {
            matching,
            ..Default::default()
        }
    }

    fn add(&mut self, shape: Shape) -> u32 {
        if let Some(&id) = self.intern.get(&shape) {
            return id;
        }
        let mut h = DefaultHasher::new();
        shape.kind.hash(&mut h);
        for &c in &shape.children {
            self.digests[c as usize].hash(&mut h);
        }
        let id = self.shapes.len() as u32;
        self.digests.push(h.finish());
        self.shapes.push(shape.clone());
        self.intern.insert(shape, id);
        id
    }

    pub fn tree(&mut self, t: &ConeTree) -> u32 {
        let children = t.children.iter().map(|c| self.tree(c)).collect();
        self.add(Shape {
            kind: t.kind,
            children,
        })
    }

    /// Shape of the depth-limited cone of `net`, equal to interning
    /// `cone_in(idx, net, limit)` without materializing the tree.
    pub fn cone(
        &mut self,
        idx: &NetlistIndex<'_>,
        net: NetId,
        limit: usize,
        memo: &mut HashMap<(NetId, usize), u32>,
    ) -> u32 {
        self.cone_at(idx, idx.skip_bufs(net), 0, limit, memo)
    }

    fn cone_at(
        &mut self,
        idx: &NetlistIndex<'_>,
        net: NetId,
        depth: usize,
        limit: usize,
        memo: &mut HashMap<(NetId, usize), u32>,
    ) -> u32 {
        let expand = matches!(idx.driver[net], Driver::Gate(_)) && depth < limit;
        let key = (net, if expand { limit - depth } else { 0 });
        if let Some(&id) = memo.get(&key) {
            return id;
        }
        let kind = NodeKind::of(idx, net);
        let mut children = Vec::new();
        if expand {
            let Driver::Gate(gi) = idx.driver[net] else {
                unreachable!()
            };
            let mut kids: Vec<(NodeKind, &str, u32)> = idx.gate_ins[gi]
                .iter()
                .map(|&i| {
                    let c = idx.skip_bufs(i);
                    let id = self.cone_at(idx, c, depth + 1, limit, memo);
                    (NodeKind::of(idx, c), idx.name(c), id)
                })
                .collect();
            kids.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            children = kids.into_iter().map(|k| k.2).collect();
        }
        let id = self.add(Shape { kind, children });
        memo.insert(key, id);
        id
    }

    pub fn similarity(&mut self, a: u32, b: u32) -> f64 {
        if a == b {
            return 1.0;
        }
        // Orient by content digest so the result does not depend on which
        // argument comes first or on interning order.
        let (x, y) = if (self.digests[a as usize], a) <= (self.digests[b as usize], b) {
            (a, b)
        } else {
            (b, a)
        };
        if let Some(&s) = self.sim.get(&(x, y)) {
            return s;
        }
        let s = self.compute(x, y);
        self.sim.insert((x, y), s);
        s
    }

    fn compute(&mut self, x: u32, y: u32) -> f64 {
        let (kx, ky) = (self.shapes[x as usize].kind, self.shapes[y as usize].kind);
        if kx != ky {
            return 0.0;
        }
        let cx = self.shapes[x as usize].children.clone();
        let cy = self.shapes[y as usize].children.clone();
        if cx.is_empty() && cy.is_empty() {
            return 1.0;
        }
        let m: Vec<Vec<f64>> = cx
            .iter()
            .map(|&i| cy.iter().map(|&j| self.similarity(i, j)).collect())
            .collect();
        let matched = match self.matching {
            Matching::Greedy => greedy_match(&m),
            Matching::Optimal => optimal_match(&m),
        };
        (1.0 + matched) / (1.0 + cx.len().max(cy.len()) as f64)
    }
}

/// Sum of similarities picked in descending order, ties by (row, column).
pub fn greedy_match(m: &[Vec<f64>]) -> f64 {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pairs: Vec<(f64, usize, usize)> = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (m[i][j], i, j)))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut total = 0.0;
    for (s, i, j) in pairs {
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            total += s;
        }
    }
    total
}

/// Maximum-weight bipartite matching (Hungarian method on 1 - s).
pub fn optimal_match(m: &[Vec<f64>]) -> f64 {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if n == 0 {
        return 0.0;
    }
    let w = |i: usize, j: usize| if i < rows && j < cols { m[i][j] } else { 0.0 };
    let cost = |i: usize, j: usize| 1.0 - w(i, j);
    // 1-based potentials formulation.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| w(p[j] - 1, j - 1)).sum()
}

/// Similarity of two cone trees.
pub fn pair_similarity(a: &ConeTree, b: &ConeTree) -> f64 {
    pair_similarity_with(a, b, Matching::Greedy)
}

pub fn pair_similarity_with(a: &ConeTree, b: &ConeTree, matching: Matching) -> f64 {
    let mut arena = ShapeArena::new(matching);
    let x = arena.tree(a);
    let y = arena.tree(b);
    arena.similarity(x, y)
}
