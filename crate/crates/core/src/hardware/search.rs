use rand::seq::SliceRandom;

use super::topology::Graph;
use crate::error::{Error, Result};
use crate::rng;

/// Limits for [`find_subgraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Stop after this many maps.
    pub limit: usize,
    /// Maximum number of candidate assignments tried.
    pub budget: u64,
    /// Shuffles the order of root candidates; `None` tries them in ascending order.
    pub seed: Option<u64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            limit: 1,
            budget: 1_000_000,
            seed: None,
        }
    }
}

/// Maps found by a subgraph search. `truncated` is set when the budget ran out
/// before the search space (or the limit) was exhausted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub maps: Vec<Vec<usize>>,
    pub truncated: bool,
    pub nodes: u64,
}

/// Whether `map` is injective and sends every pattern edge to a target edge.
pub fn verify_map(pattern: &Graph, target: &Graph, map: &[usize]) -> bool {
    if map.len() != pattern.num_vertices() || map.iter().any(|&q| q >= target.num_vertices()) {
        return false;
    }
    let mut used = vec![false; target.num_vertices()];
    for &q in map {
        if std::mem::replace(&mut used[q], true) {
            return false;
        }
    }
    pattern
        .edges()
        .into_iter()
        .all(|(a, b)| target.has_edge(map[a], map[b]))
}

/// Variable order: each next pattern vertex has the most already-ordered neighbors
/// (ties: higher degree, then lower index), so connected patterns grow connected.
fn search_order(pattern: &Graph) -> Vec<usize> {
    let n = pattern.num_vertices();
    let mut placed = vec![false; n];
    let mut links = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| (links[v], pattern.degree(v), std::cmp::Reverse(v)))
            .expect("unplaced vertex remains");
        placed[next] = true;
        order.push(next);
        for &w in pattern.neighbors(next) {
            links[w] += 1;
        }
    }
    order
}

struct Search<'a> {
    pattern: &'a Graph,
    target: &'a Graph,
    order: Vec<usize>,
    parents: Vec<Vec<usize>>,
    roots: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
    options: SearchOptions,
    nodes: u64,
    truncated: bool,
    found: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.truncated || self.found.len() >= self.options.limit
    }

    fn explore(&mut self, depth: usize) {
        if depth == self.order.len() {
            debug_assert!(verify_map(self.pattern, self.target, &self.map));
            self.found.push(self.map.clone());
            return;
        }
        let p = self.order[depth];
        let candidates: Vec<usize> = match self.parents[depth].first() {
            None => self.roots.clone(),
            Some(&anchor) => self.target.neighbors(self.map[anchor]).to_vec(),
        };
        let need = self.pattern.degree(p);
        for c in candidates {
            if self.used[c] || self.target.degree(c) < need {
                continue;
            }
            if !self.parents[depth]
                .iter()
                .skip(1)
                .all(|&q| self.target.has_edge(self.map[q], c))
            {
                continue;
            }
            if self.nodes >= self.options.budget {
                self.truncated = true;
                return;
            }
            self.nodes += 1;
            self.map[p] = c;
            self.used[c] = true;
            self.explore(depth + 1);
            self.used[c] = false;
            if self.done() {
                return;
            }
        }
        self.map[p] = usize::MAX;
    }
}

/// Non-induced subgraph isomorphisms of `pattern` into `target` by backtracking, with
/// degree filtering and a connected variable order. Every returned map is verified.
pub fn find_subgraph(
    pattern: &Graph,
    target: &Graph,
    options: SearchOptions,
) -> Result<SearchOutcome> {
    if pattern.num_vertices() == 0 {
        return Err(Error::InvalidDimensions("empty pattern".into()));
    }
    if pattern.num_vertices() > target.num_vertices() || options.limit == 0 {
        return Ok(SearchOutcome {
            maps: Vec::new(),
            truncated: false,
            nodes: 0,
        });
    }
    let order = search_order(pattern);
    let mut position = vec![0; order.len()];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    let parents = order
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let mut ps: Vec<usize> = pattern
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| position[w] < k)
                .collect();
            ps.sort_by_key(|&w| position[w]);
            ps
        })
        .collect();
    let mut roots: Vec<usize> = (0..target.num_vertices()).collect();
    if let Some(seed) = options.seed {
        roots.shuffle(&mut rng::rng_for(seed, rng::STREAM_EMBED, 0));
    }
    let mut search = Search {
        pattern,
        target,
        order,
        parents,
        roots,
        map: vec![usize::MAX; pattern.num_vertices()],
        used: vec![false; target.num_vertices()],
        options,
        nodes: 0,
        truncated: false,
        found: Vec::new(),
    };
    search.explore(0);
    let Search {
        found,
        truncated,
        nodes,
        ..
    } = search;
    assert!(found.iter().all(|m| verify_map(pattern, target, m)));
    Ok(SearchOutcome {
        maps: found,
        truncated,
        nodes,
    })
}
