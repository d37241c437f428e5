use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::IsingModel;
use crate::error::{Error, Result};

/// Resolution used to quantize fields and couplings before comparing them.
pub const QUANTUM: f64 = 1e-9;

/// Auxiliary model over `2N` spins: spin `i` becomes `v_i = i` and its negation `v̄_i = N + i`.
///
/// Every original coupler `(i, j)` becomes four couplers: `(v_i, v_j)` and `(v̄_i, v̄_j)`
/// carrying `J_ij`, and `(v̄_i, v_j)` and `(v_i, v̄_j)` carrying `-J_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedIsingModel {
    pub base: IsingModel,
    pub plain_of: Vec<usize>,
    pub bar_of: Vec<usize>,
}

impl SignedIsingModel {
    pub fn num_original(&self) -> usize {
        self.plain_of.len()
    }

    /// The involution `v_i <-> v̄_i` on signed spins.
    pub fn partner(&self, v: usize) -> usize {
        let n = self.num_original();
        if v < n {
            v + n
        } else {
            v - n
        }
    }

    /// Whether signed spin `v` is a plain copy.
    pub fn is_plain(&self, v: usize) -> bool {
        v < self.num_original()
    }

    /// Index of the signed coupler `(a, b)` in the base model.
    pub fn coupler(&self, a: usize, b: usize) -> usize {
        self.base
            .coupler_index(a, b)
            .expect("signed coupler exists by construction")
    }

    /// Extends [`Self::partner`] to the vertices of [`signed_to_labeled_graph`]'s output.
    pub fn graph_partner(&self) -> Vec<usize> {
        let spins = self.base.num_spins();
        let mut map: Vec<usize> = (0..spins).map(|v| self.partner(v)).collect();
        for &(a, b) in self.base.edges() {
            map.push(spins + self.coupler(self.partner(a), self.partner(b)));
        }
        map
    }
}

pub fn build_signed(model: &IsingModel) -> SignedIsingModel {
    let n = model.num_spins();
    let fields = model
        .fields()
        .iter()
        .copied()
        .chain(model.fields().iter().map(|h| -h))
        .collect();
    let couplings = model.couplings().flat_map(|((i, j), v)| {
        [
            ((i, j), v),
            ((n + i, n + j), v),
            ((n + i, j), -v),
            ((i, n + j), -v),
        ]
    });
    let base = IsingModel::new(2 * n, fields, couplings)
        .expect("signed construction of a valid model is valid");
    SignedIsingModel {
        base,
        plain_of: (0..n).collect(),
        bar_of: (n..2 * n).collect(),
    }
}

/// Simple graph with integer vertex and edge colors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledGraph {
    vertex_labels: Vec<u32>,
    edges: Vec<(usize, usize)>,
    edge_labels: Vec<u32>,
}

impl LabeledGraph {
    pub fn new(
        vertex_labels: Vec<u32>,
        edges: Vec<(usize, usize)>,
        edge_labels: Vec<u32>,
    ) -> Result<Self> {
        if edges.len() != edge_labels.len() {
            return Err(Error::LengthMismatch {
                expected: edges.len(),
                got: edge_labels.len(),
            });
        }
        let n = vertex_labels.len();
        let mut seen = BTreeSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= n {
                return Err(Error::SpinOutOfRange {
                    index: j,
                    num_spins: n,
                });
            }
            if i == j {
                return Err(Error::SelfCoupling(i));
            }
            if !seen.insert((i, j)) {
                return Err(Error::DuplicateCoupling(i, j));
            }
            norm.push((i, j));
        }
        Ok(Self {
            vertex_labels,
            edges: norm,
            edge_labels,
        })
    }

    /// Unlabeled graph (all colors 0).
    pub fn unlabeled(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let m = edges.len();
        Self::new(vec![0; n], edges, vec![0; m])
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn vertex_labels(&self) -> &[u32] {
        &self.vertex_labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_labels(&self) -> &[u32] {
        &self.edge_labels
    }

    pub fn num_distinct_labels(&self) -> usize {
        self.vertex_labels.iter().collect::<BTreeSet<_>>().len()
    }

    /// `(neighbor, edge label)` lists.
    pub fn adjacency(&self) -> Vec<Vec<(usize, u32)>> {
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for (&(a, b), &l) in self.edges.iter().zip(&self.edge_labels) {
            adj[a].push((b, l));
            adj[b].push((a, l));
        }
        adj
    }

    /// Map from normalized edge to edge index.
    pub fn edge_index(&self) -> HashMap<(usize, usize), usize> {
        self.edges
            .iter()
            .enumerate()
            .map(|(k, &e)| (e, k))
            .collect()
    }
}

fn quantize(x: f64) -> i64 {
    (x / QUANTUM).round() as i64
}

/// Encodes a signed model as a vertex-labeled graph: one vertex per signed spin
/// (colored by its quantized field) followed by one subdivision vertex per signed
/// coupler (colored by its quantized coupling, from a disjoint color range).
/// Subdivision vertex `2N + k` stands for coupler index `k` of `sm.base`.
pub fn signed_to_labeled_graph(sm: &SignedIsingModel) -> LabeledGraph {
    let base = &sm.base;
    let field_q: Vec<i64> = base.fields().iter().map(|&h| quantize(h)).collect();
    let coupling_q: Vec<i64> = base
        .coupling_values()
        .iter()
        .map(|&v| quantize(v))
        .collect();
    let field_ids: BTreeSet<i64> = field_q.iter().copied().collect();
    let coupling_ids: BTreeSet<i64> = coupling_q.iter().copied().collect();
    let field_rank: HashMap<i64, u32> = field_ids
        .iter()
        .enumerate()
        .map(|(r, &q)| (q, r as u32))
        .collect();
    let offset = field_ids.len() as u32;
    let coupling_rank: HashMap<i64, u32> = coupling_ids
        .iter()
        .enumerate()
        .map(|(r, &q)| (q, offset + r as u32))
        .collect();

    let spins = base.num_spins();
    let mut labels: Vec<u32> = field_q.iter().map(|q| field_rank[q]).collect();
    labels.extend(coupling_q.iter().map(|q| coupling_rank[q]));
    let mut edges = Vec::with_capacity(2 * base.num_couplers());
    for (k, &(a, b)) in base.edges().iter().enumerate() {
        edges.push((a, spins + k));
        edges.push((b, spins + k));
    }
    let m = edges.len();
    LabeledGraph::new(labels, edges, vec![0; m]).expect("subdivision graph is simple")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{make_fm_loop, make_frustrated_loop};

    #[test]
    fn signed_counts() {
        let sq = make_frustrated_loop(4, -1.0).unwrap();
        let s = build_signed(&sq);
        assert_eq!(s.base.num_spins(), 8);
        assert_eq!(s.base.num_couplers(), 16);

        let single = IsingModel::new(1, vec![0.5], []).unwrap();
        let s1 = build_signed(&single);
        assert_eq!(s1.base.fields(), &[0.5, -0.5]);
        assert_eq!(s1.base.num_couplers(), 0);

        let big = build_signed(&make_fm_loop(64, -0.2).unwrap());
        assert_eq!(big.base.num_spins(), 128);
        assert_eq!(big.base.num_couplers(), 256);
    }

    #[test]
    fn signed_invariants_and_restriction() {
        let m = IsingModel::new(3, vec![0.3, -0.2, 0.0], [((0, 1), 1.0), ((1, 2), -0.5)]).unwrap();
        let s = build_signed(&m);
        for i in 0..3 {
            assert_eq!(s.base.field(s.bar_of[i]), -s.base.field(s.plain_of[i]));
        }
        for ((i, j), v) in m.couplings() {
            let (p, b) = (&s.plain_of, &s.bar_of);
            assert_eq!(s.base.coupling(p[i], p[j]), Some(v));
            assert_eq!(s.base.coupling(b[i], b[j]), Some(v));
            assert_eq!(s.base.coupling(b[i], p[j]), Some(-v));
            assert_eq!(s.base.coupling(p[i], b[j]), Some(-v));
        }
        assert_eq!(s.base.num_couplers(), 4 * m.num_couplers());
        assert_eq!(s.base.restrict(3), m);
    }

    #[test]
    fn labeled_graph_counts_and_labels() {
        let sq = make_fm_loop(4, -1.0).unwrap();
        let g = signed_to_labeled_graph(&build_signed(&sq));
        assert_eq!(g.num_vertices(), 24);
        assert_eq!(g.edges().len(), 32);
        // fields {0}, couplings {-1, +1}
        assert_eq!(g.num_distinct_labels(), 3);

        let single_sign = IsingModel::new(2, vec![], [((0, 1), 1.0)]).unwrap();
        let mut s = build_signed(&single_sign);
        // force equal couplings to see the two-label case
        s.base = s.base.with_values(vec![0.0; 4], vec![1.0; 4]).unwrap();
        assert_eq!(signed_to_labeled_graph(&s).num_distinct_labels(), 2);
    }

    #[test]
    fn quantization_absorbs_float_noise() {
        let m = IsingModel::new(
            3,
            vec![],
            [((0, 1), 0.1 + 0.2), ((1, 2), 0.3), ((0, 2), 0.3)],
        )
        .unwrap();
        let g = signed_to_labeled_graph(&build_signed(&m));
        assert_eq!(g.num_distinct_labels(), 3);
    }

    #[test]
    fn graph_partner_is_involution() {
        let s = build_signed(&make_frustrated_loop(5, -1.0).unwrap());
        let p = s.graph_partner();
        for (v, &w) in p.iter().enumerate() {
            assert_ne!(v, w);
            assert_eq!(p[w], v);
        }
    }
}
