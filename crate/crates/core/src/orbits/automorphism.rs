//! Label-preserving automorphism groups by individualization and refinement.
//!
//! The search follows one leftmost path of the refinement tree down to a discrete
//! partition. Then, from the deepest level upward, for every vertex `w` in the target
//! cell that is not already in the orbit of the path vertex (under generators found so
//! far, all of which fix the earlier path vertices), it explores the subtree rooted at
//! `w` for a leaf whose induced permutation is an automorphism. Refinement traces are
//! compared against the first path to cut subtrees early.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::partition::UnionFind;
use crate::error::{Error, Result};
use crate::ising::LabeledGraph;

/// Color, sorted `(edge label, neighbor color)` list and vertex of one refinement round.
type Signature = (u32, Vec<(u32, u32)>, usize);

/// Default cap on refinement-tree nodes visited by one search.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &x in &image {
            if x >= image.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidParameter(
                    "permutation image is not a bijection".into(),
                ));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, v: usize) -> usize {
        self.image[v]
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Whether this maps vertices to equally labeled vertices and edges to equally
    /// labeled edges of `g`.
    pub fn is_automorphism(&self, g: &LabeledGraph) -> bool {
        if self.len() != g.num_vertices() {
            return false;
        }
        let labels = g.vertex_labels();
        if (0..self.len()).any(|v| labels[v] != labels[self.image[v]]) {
            return false;
        }
        let edges: HashMap<(usize, usize), u32> = g
            .edges()
            .iter()
            .copied()
            .zip(g.edge_labels().iter().copied())
            .collect();
        edges.iter().all(|(&(a, b), &l)| {
            let (x, y) = (self.image[a], self.image[b]);
            edges.get(&(x.min(y), x.max(y))) == Some(&l)
        })
    }
}

/// Generators of the full label-preserving automorphism group of `g`.
pub fn automorphism_generators(g: &LabeledGraph, budget: u64) -> Result<Vec<Permutation>> {
    Search::new(g, None, budget).run()
}

/// Generators of the subgroup of automorphisms that commute with the involution
/// `partner` (every generator `p` satisfies `p(partner(v)) = partner(p(v))`).
pub fn automorphism_generators_commuting(
    g: &LabeledGraph,
    partner: &[usize],
    budget: u64,
) -> Result<Vec<Permutation>> {
    if partner.len() != g.num_vertices() {
        return Err(Error::LengthMismatch {
            expected: g.num_vertices(),
            got: partner.len(),
        });
    }
    Search::new(g, Some(partner), budget).run()
}

/// Ordered partition stored as a color per vertex; colors are dense and their order
/// is the cell order.
#[derive(Clone)]
struct Coloring {
    colors: Vec<u32>,
    cells: usize,
}

struct Level {
    coloring: Coloring,
    cell: Vec<usize>,
    chosen: usize,
}

struct Search<'g> {
    graph: &'g LabeledGraph,
    adj: Vec<Vec<(usize, u32)>>,
    edges: HashMap<(usize, usize), u32>,
    partner: Option<&'g [usize]>,
    budget: u64,
    visited: u64,
    /// `traces[d]` is the refinement trace of the first-path node at depth `d`.
    traces: Vec<u64>,
    leaf: Vec<usize>,
}

impl<'g> Search<'g> {
    fn new(graph: &'g LabeledGraph, partner: Option<&'g [usize]>, budget: u64) -> Self {
        Self {
            graph,
            adj: graph.adjacency(),
            edges: graph
                .edges()
                .iter()
                .copied()
                .zip(graph.edge_labels().iter().copied())
                .collect(),
            partner,
            budget,
            visited: 0,
            traces: Vec::new(),
            leaf: Vec::new(),
        }
    }

    fn run(mut self) -> Result<Vec<Permutation>> {
        let n = self.graph.num_vertices();
        if n == 0 {
            return Ok(Vec::new());
        }
        let initial = dense(self.graph.vertex_labels().to_vec());
        let (root, trace) = self.refine(initial)?;
        self.traces.push(trace);

        let mut path: Vec<Level> = Vec::new();
        let mut node = root;
        while node.cells < n {
            let cell = target_cell(&node);
            let chosen = cell[0];
            let (child, trace) = self.refine(individualize(&node, chosen))?;
            self.traces.push(trace);
            path.push(Level {
                coloring: node,
                cell,
                chosen,
            });
            node = child;
        }
        self.leaf = vertex_at_color(&node);

        let mut generators: Vec<Permutation> = Vec::new();
        for depth in (0..path.len()).rev() {
            let mut orbits = UnionFind::new(n);
            for gen in &generators {
                for (v, &w) in gen.image().iter().enumerate() {
                    orbits.union(v, w);
                }
            }
            let level = &path[depth];
            let start = level.coloring.clone();
            let chosen = level.chosen;
            let candidates: Vec<usize> = level.cell[1..].to_vec();
            for w in candidates {
                if orbits.same(w, chosen) {
                    continue;
                }
                let (child, trace) = self.refine(individualize(&start, w))?;
                if trace != self.traces[depth + 1] {
                    continue;
                }
                if let Some(perm) = self.explore(child, depth + 1)? {
                    for (v, &x) in perm.image().iter().enumerate() {
                        orbits.union(v, x);
                    }
                    generators.push(perm);
                }
            }
        }
        Ok(generators)
    }

    /// Depth-first search below a node whose trace already matched the first path.
    fn explore(&mut self, node: Coloring, depth: usize) -> Result<Option<Permutation>> {
        let n = self.graph.num_vertices();
        if node.cells == n {
            return Ok(self.leaf_permutation(&node));
        }
        if depth + 1 >= self.traces.len() {
            return Ok(None);
        }
        for w in target_cell(&node) {
            let (child, trace) = self.refine(individualize(&node, w))?;
            if trace != self.traces[depth + 1] {
                continue;
            }
            if let Some(p) = self.explore(child, depth + 1)? {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }

    fn leaf_permutation(&self, node: &Coloring) -> Option<Permutation> {
        let other = vertex_at_color(node);
        let mut image = vec![0; self.leaf.len()];
        for (c, &v) in self.leaf.iter().enumerate() {
            image[v] = other[c];
        }
        let labels = self.graph.vertex_labels();
        if (0..image.len()).any(|v| labels[v] != labels[image[v]]) {
            return None;
        }
        let preserves = self.edges.iter().all(|(&(a, b), &l)| {
            let (x, y) = (image[a], image[b]);
            self.edges.get(&(x.min(y), x.max(y))) == Some(&l)
        });
        if !preserves {
            return None;
        }
        if let Some(partner) = self.partner {
            if (0..image.len()).any(|v| image[partner[v]] != partner[image[v]]) {
                return None;
            }
        }
        Some(Permutation { image })
    }

    /// Iterated color refinement to the coarsest equitable refinement. Returns the
    /// refined coloring and an isomorphism-invariant hash of the refinement steps.
    fn refine(&mut self, mut coloring: Coloring) -> Result<(Coloring, u64)> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        let n = coloring.colors.len();
        let mut hasher = DefaultHasher::new();
        coloring.cells.hash(&mut hasher);
        loop {
            let mut signatures: Vec<Signature> = (0..n)
                .map(|v| {
                    let mut nbrs: Vec<(u32, u32)> = self.adj[v]
                        .iter()
                        .map(|&(w, l)| (l, coloring.colors[w]))
                        .collect();
                    nbrs.sort_unstable();
                    (coloring.colors[v], nbrs, v)
                })
                .collect();
            signatures.sort_unstable();
            let mut colors = vec![0u32; n];
            let mut next = 0u32;
            for k in 0..n {
                if k > 0
                    && (signatures[k].0 != signatures[k - 1].0
                        || signatures[k].1 != signatures[k - 1].1)
                {
                    next += 1;
                    (&signatures[k].0, &signatures[k].1).hash(&mut hasher);
                    k.hash(&mut hasher);
                }
                colors[signatures[k].2] = next;
            }
            let cells = next as usize + 1;
            if cells == coloring.cells {
                // stable; fold the final cell structure into the trace
                for k in 0..n {
                    if k == 0 || signatures[k].0 != signatures[k - 1].0 {
                        (&signatures[k].0, &signatures[k].1).hash(&mut hasher);
                    }
                }
                return Ok((coloring, hasher.finish()));
            }
            coloring = Coloring { colors, cells };
        }
    }
}

fn dense(labels: Vec<u32>) -> Coloring {
    let mut distinct = labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let colors = labels
        .iter()
        .map(|l| distinct.binary_search(l).unwrap() as u32)
        .collect();
    Coloring {
        colors,
        cells: distinct.len(),
    }
}

/// First smallest non-singleton cell, members in ascending vertex order.
fn target_cell(c: &Coloring) -> Vec<usize> {
    let mut sizes = vec![0usize; c.cells];
    for &x in &c.colors {
        sizes[x as usize] += 1;
    }
    let target = (0..c.cells)
        .filter(|&k| sizes[k] > 1)
        .min_by_key(|&k| (sizes[k], k))
        .expect("non-discrete coloring has a non-singleton cell") as u32;
    (0..c.colors.len())
        .filter(|&v| c.colors[v] == target)
        .collect()
}

/// Splits `v` off the front of its cell.
fn individualize(c: &Coloring, v: usize) -> Coloring {
    let target = c.colors[v];
    let colors = c
        .colors
        .iter()
        .enumerate()
        .map(|(u, &x)| {
            if x > target || (x == target && u != v) {
                x + 1
            } else {
                x
            }
        })
        .collect();
    Coloring {
        colors,
        cells: c.cells + 1,
    }
}

fn vertex_at_color(c: &Coloring) -> Vec<usize> {
    let mut at = vec![0; c.colors.len()];
    for (v, &x) in c.colors.iter().enumerate() {
        at[x as usize] = v;
    }
    at
}
