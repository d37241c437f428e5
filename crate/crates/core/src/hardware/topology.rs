use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ising::IsingModel;

/// A simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list; duplicate edges collapse, self-loops are rejected.
    pub fn from_edges(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); num_vertices];
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= num_vertices {
                    return Err(Error::SpinOutOfRange {
                        index: v,
                        num_spins: num_vertices,
                    });
                }
            }
            if a == b {
                return Err(Error::SelfCoupling(a));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adjacency })
    }

    /// The coupling graph of a model.
    pub fn from_model(model: &IsingModel) -> Self {
        Self::from_edges(model.num_spins(), model.edges()).expect("model edges are valid")
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges `(a, b)` with `a < b` in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
            .collect()
    }

    /// Subgraph induced by `vertices`; local vertex `k` is `vertices[k]`.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut local = BTreeMap::new();
        for (k, &v) in vertices.iter().enumerate() {
            local.insert(v, k);
        }
        let adjacency = vertices
            .iter()
            .map(|&v| {
                let mut list: Vec<usize> = self.adjacency[v]
                    .iter()
                    .filter_map(|w| local.get(w).copied())
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        Graph { adjacency }
    }
}

/// Cell coordinate `(row, column)`. Pegasus cells on the fabric edge may use -1.
pub type Cell = (i64, i64);

/// Qubit connectivity of an annealer with an operability mask and unit cells.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareGraph {
    name: String,
    graph: Graph,
    operable: Vec<bool>,
    cells: BTreeMap<Cell, Vec<usize>>,
}

impl HardwareGraph {
    /// Builds a hardware graph; `cells` must partition the qubits.
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        edges: &[(usize, usize)],
        cells: BTreeMap<Cell, Vec<usize>>,
    ) -> Result<Self> {
        let graph = Graph::from_edges(num_qubits, edges)?;
        let mut seen = vec![false; num_qubits];
        for members in cells.values() {
            for &q in members {
                if q >= num_qubits || std::mem::replace(&mut seen[q], true) {
                    return Err(Error::InvalidDimensions(format!(
                        "cells do not partition the qubits (qubit {q})"
                    )));
                }
            }
        }
        if let Some(q) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidDimensions(format!("qubit {q} is in no cell")));
        }
        Ok(Self {
            name: name.into(),
            graph,
            operable: vec![true; num_qubits],
            cells,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.operable.len()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn is_operable(&self, q: usize) -> bool {
        self.operable[q]
    }

    pub fn num_operable(&self) -> usize {
        self.operable.iter().filter(|&&o| o).count()
    }

    /// Whether `(a, b)` is a hardware edge between two operable qubits.
    pub fn usable_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_qubits()
            && b < self.num_qubits()
            && self.operable[a]
            && self.operable[b]
            && self.graph.has_edge(a, b)
    }

    pub fn cells(&self) -> &BTreeMap<Cell, Vec<usize>> {
        &self.cells
    }

    /// Smallest and largest cell coordinates.
    pub fn cell_bounds(&self) -> (Cell, Cell) {
        let rows = self.cells.keys().map(|c| c.0);
        let cols = self.cells.keys().map(|c| c.1);
        (
            (
                rows.clone().min().unwrap_or(0),
                cols.clone().min().unwrap_or(0),
            ),
            (rows.max().unwrap_or(0), cols.max().unwrap_or(0)),
        )
    }
}

/// Marks `dead` qubits inoperable.
pub fn mask_qubits(g: &HardwareGraph, dead: &BTreeSet<usize>) -> Result<HardwareGraph> {
    let mut out = g.clone();
    for &q in dead {
        if q >= out.num_qubits() {
            return Err(Error::SpinOutOfRange {
                index: q,
                num_spins: out.num_qubits(),
            });
        }
        out.operable[q] = false;
    }
    Ok(out)
}

/// Chimera graph of `m x n` unit cells, each a complete bipartite `K_{t,t}`.
///
/// Qubit `(i, j, u, k)` has index `((i n + j) 2 + u) t + k`; `u = 0` qubits couple to
/// the same `k` in the cell below, `u = 1` qubits to the cell on the right.
pub fn make_chimera(m: usize, n: usize, t: usize) -> Result<HardwareGraph> {
    if m == 0 || n == 0 || t == 0 {
        return Err(Error::InvalidDimensions(format!("chimera:{m},{n},{t}")));
    }
    let index = |i: usize, j: usize, u: usize, k: usize| ((i * n + j) * 2 + u) * t + k;
    let mut edges = Vec::new();
    let mut cells = BTreeMap::new();
    for i in 0..m {
        for j in 0..n {
            for a in 0..t {
                for b in 0..t {
                    edges.push((index(i, j, 0, a), index(i, j, 1, b)));
                }
                if i + 1 < m {
                    edges.push((index(i, j, 0, a), index(i + 1, j, 0, a)));
                }
                if j + 1 < n {
                    edges.push((index(i, j, 1, a), index(i, j + 1, 1, a)));
                }
            }
            let members = (0..2 * t).map(|x| index(i, j, 0, 0) + x).collect();
            cells.insert((i as i64, j as i64), members);
        }
    }
    HardwareGraph::new(format!("chimera:{m},{n},{t}"), m * n * 2 * t, &edges, cells)
}

const PEGASUS_VERTICAL_OFFSETS: [usize; 12] = [2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6];
const PEGASUS_HORIZONTAL_OFFSETS: [usize; 12] = [6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10];

/// Pegasus coordinates `(u, w, k, z)` of a linear qubit index.
pub fn pegasus_coordinates(m: usize, q: usize) -> (usize, usize, usize, usize) {
    let z = q % (m - 1);
    let rest = q / (m - 1);
    let k = rest % 12;
    let rest = rest / 12;
    (rest / m, rest % m, k, z)
}

/// Linear index of Pegasus coordinates `(u, w, k, z)`.
pub fn pegasus_index(m: usize, u: usize, w: usize, k: usize, z: usize) -> usize {
    ((u * m + w) * 12 + k) * (m - 1) + z
}

/// Cell `(y, x)` of a Pegasus qubit in the "nice" coordinate system, which groups
/// the qubits into Chimera-like cells of up to 24 qubits.
pub fn pegasus_cell(m: usize, q: usize) -> Cell {
    let (u, w, k, z) = pegasus_coordinates(m, q);
    let (u, w, k, z) = (u as i64, w as i64, k as i64, z as i64);
    let t = (2 - u - (2 * u - 1) * (k / 4)).rem_euclid(3);
    let (y, x) = match (t, u) {
        (0 | 1, 1) => (w - 1, z),
        (0 | 1, _) => (z, w),
        (_, 1) => (w, z),
        (_, _) => (z, w - 1),
    };
    (y, x)
}

/// Pegasus graph `P_m` with all `24 m (m - 1)` qubits (fabric edge qubits included).
pub fn make_pegasus(m: usize) -> Result<HardwareGraph> {
    if m < 2 {
        return Err(Error::InvalidDimensions(format!(
            "pegasus:{m} (need m >= 2)"
        )));
    }
    let idx = |u, w, k, z| pegasus_index(m, u, w, k, z);
    let mut edges = Vec::new();
    for u in 0..2 {
        for w in 0..m {
            for k in 0..12 {
                for z in 0..m - 1 {
                    if z + 1 < m - 1 {
                        edges.push((idx(u, w, k, z), idx(u, w, k, z + 1)));
                    }
                    if k % 2 == 0 {
                        edges.push((idx(u, w, k, z), idx(u, w, k + 1, z)));
                    }
                }
            }
        }
    }
    for w in 0..m {
        for (kk, &h_off) in PEGASUS_HORIZONTAL_OFFSETS.iter().enumerate() {
            let lo = if w > 0 { 0 } else { h_off };
            let hi = if w < m - 1 { 12 } else { h_off };
            for (k, &v_off) in PEGASUS_VERTICAL_OFFSETS
                .iter()
                .enumerate()
                .take(hi)
                .skip(lo)
            {
                for z in 0..m - 1 {
                    let w2 = z + usize::from(kk < v_off);
                    let z2 = w - usize::from(k < h_off);
                    edges.push((idx(0, w, k, z), idx(1, w2, kk, z2)));
                }
            }
        }
    }
    let n = 24 * m * (m - 1);
    let mut cells: BTreeMap<Cell, Vec<usize>> = BTreeMap::new();
    for q in 0..n {
        cells.entry(pegasus_cell(m, q)).or_default().push(q);
    }
    HardwareGraph::new(format!("pegasus:{m}"), n, &edges, cells)
}

/// Parses `pegasus:M`, `chimera:M`, `chimera:M,N` or `chimera:M,N,T` (default `t = 4`).
pub fn parse_hardware_spec(spec: &str) -> Result<HardwareGraph> {
    let bad = || Error::InvalidDimensions(format!("unrecognized hardware spec {spec:?}"));
    let (family, dims) = spec.split_once(':').ok_or_else(bad)?;
    let dims: Vec<usize> = dims
        .split(',')
        .map(|d| d.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match (family.trim(), dims.as_slice()) {
        ("pegasus", [m]) => make_pegasus(*m),
        ("chimera", [m]) => make_chimera(*m, *m, 4),
        ("chimera", [m, n]) => make_chimera(*m, *n, 4),
        ("chimera", [m, n, t]) => make_chimera(*m, *n, *t),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MERSENNE_61: u128 = (1 << 61) - 1;

    fn fingerprints(g: &Graph) -> (u128, u128) {
        let mut a = 0u128;
        let mut b = 0u128;
        for (x, y) in g.edges() {
            let (x, y) = (x as u128, y as u128);
            a = (a + (x + 1) * (y + 7)) % MERSENNE_61;
            b += x * x + 3 * y;
        }
        (a, b)
    }

    #[test]
    fn chimera_counts() {
        let g = make_chimera(1, 1, 4).unwrap();
        assert_eq!((g.num_qubits(), g.graph().num_edges()), (8, 16));
        let g = make_chimera(2, 2, 4).unwrap();
        assert_eq!((g.num_qubits(), g.graph().num_edges()), (32, 80));
        assert_eq!(g.cells().len(), 4);
        assert!(make_chimera(0, 1, 4).is_err());
    }

    #[test]
    fn pegasus_counts_match_closed_forms() {
        for (m, edges) in [(2, 168), (3, 720), (4, 1632)] {
            let g = make_pegasus(m).unwrap();
            assert_eq!(g.num_qubits(), 24 * m * (m - 1));
            assert_eq!(g.graph().num_edges(), edges);
            assert_eq!(edges, 12 * (15 * (m - 1) * (m - 1) + m - 3));
        }
        assert!(make_pegasus(1).is_err());
    }

    #[test]
    fn pegasus_matches_reference_edge_lists() {
        let g = make_pegasus(2).unwrap();
        assert_eq!(fingerprints(g.graph()), (98_764, 56_656));
        let g = make_pegasus(3).unwrap();
        assert_eq!(fingerprints(g.graph()), (3_478_620, 2_047_536));
        let first: Vec<(usize, usize)> = g.graph().edges().into_iter().take(12).collect();
        assert_eq!(
            first,
            vec![
                (0, 1),
                (0, 2),
                (1, 3),
                (2, 3),
                (4, 5),
                (4, 6),
                (4, 80),
                (4, 82),
                (4, 84),
                (4, 86),
                (5, 7),
                (5, 104)
            ]
        );
    }

    #[test]
    fn pegasus_16() {
        let g = make_pegasus(16).unwrap();
        assert_eq!(g.num_qubits(), 5760);
        assert_eq!(g.graph().num_edges(), 40_656);
        assert_eq!(fingerprints(g.graph()), (293_606_019_540, 178_531_090_176));
        assert_eq!(g.cells().len(), 285);
        let sizes: BTreeSet<usize> = g.cells().values().map(Vec::len).collect();
        assert_eq!(sizes, BTreeSet::from([4, 8, 24]));
        let interior_degree = (0..g.num_qubits()).map(|q| g.graph().degree(q)).max();
        assert_eq!(interior_degree, Some(15));
    }

    #[test]
    fn coordinates_roundtrip() {
        let m = 5;
        for q in 0..24 * m * (m - 1) {
            let (u, w, k, z) = pegasus_coordinates(m, q);
            assert_eq!(pegasus_index(m, u, w, k, z), q);
        }
    }

    #[test]
    fn masking() {
        let g = make_chimera(1, 1, 4).unwrap();
        assert_eq!(mask_qubits(&g, &BTreeSet::new()).unwrap(), g);
        let masked = mask_qubits(&g, &BTreeSet::from([0])).unwrap();
        assert!(!masked.usable_edge(0, 4));
        assert!(masked.usable_edge(1, 4));
        assert_eq!(masked.num_operable(), 7);
        assert!(mask_qubits(&g, &BTreeSet::from([8])).is_err());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            parse_hardware_spec("chimera:2,2,4").unwrap().num_qubits(),
            32
        );
        assert_eq!(parse_hardware_spec("chimera:2").unwrap().num_qubits(), 32);
        assert_eq!(parse_hardware_spec("pegasus:3").unwrap().num_qubits(), 144);
        for bad in ["pegasus", "zephyr:2", "pegasus:x", "chimera:1,2,3,4"] {
            assert!(parse_hardware_spec(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn induced_subgraph() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let sub = g.induced(&[3, 0, 1]);
        assert_eq!(sub.edges(), vec![(0, 1), (1, 2)]);
    }
}
