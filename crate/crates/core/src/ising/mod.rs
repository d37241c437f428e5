//! Classical Ising models `H(s) = Σ h_i s_i + Σ_{i<j} J_ij s_i s_j` over spins `s_i ∈ {-1, +1}`.
//!
//! Couplers are stored in ascending `(i, j)` order with `i < j`; the position of a
//! coupler in that order is its *coupler index*, used by every per-coupler vector in
//! the crate (frustrations, noise gains, shimmed couplings).

mod generators;
mod signed;
mod text;

#[cfg(test)]
pub(crate) use generators::buckyball_with_kinds;
pub use generators::{
    contract_chains, make_buckyball, make_fm_loop, make_frustrated_loop, make_spin_glass,
    make_square_cylinder, SquareCylinder,
};
pub use signed::{build_signed, signed_to_labeled_graph, LabeledGraph, SignedIsingModel, QUANTUM};
pub use text::{format_text_model, parse_text_model};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A coupler key `(i, j)` with `i < j`.
pub type Coupler = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct IsingModel {
    num_spins: usize,
    fields: Vec<f64>,
    edges: Vec<Coupler>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    num_spins: usize,
    fields: Vec<f64>,
    couplings: Vec<(usize, usize, f64)>,
}

impl TryFrom<RawModel> for IsingModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        IsingModel::new(
            raw.num_spins,
            raw.fields,
            raw.couplings.into_iter().map(|(i, j, v)| ((i, j), v)),
        )
    }
}

impl From<IsingModel> for RawModel {
    fn from(m: IsingModel) -> Self {
        RawModel {
            num_spins: m.num_spins,
            couplings: m.couplings().map(|((i, j), v)| (i, j, v)).collect(),
            fields: m.fields,
        }
    }
}

impl IsingModel {
    /// Builds a model. `fields` may be shorter than `num_spins` (missing entries are 0).
    /// Coupler keys may be given in either orientation.
    pub fn new(
        num_spins: usize,
        fields: Vec<f64>,
        couplings: impl IntoIterator<Item = (Coupler, f64)>,
    ) -> Result<Self> {
        if fields.len() > num_spins {
            return Err(Error::SpinOutOfRange {
                index: fields.len() - 1,
                num_spins,
            });
        }
        let mut fields = fields;
        if let Some(&bad) = fields.iter().find(|h| !h.is_finite()) {
            return Err(Error::NonFinite {
                what: "field",
                value: bad,
            });
        }
        fields.resize(num_spins, 0.0);

        let mut pairs: Vec<(Coupler, f64)> = Vec::new();
        for ((a, b), v) in couplings {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= num_spins {
                return Err(Error::SpinOutOfRange {
                    index: j,
                    num_spins,
                });
            }
            if i == j {
                return Err(Error::SelfCoupling(i));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "coupling",
                    value: v,
                });
            }
            if v == 0.0 {
                return Err(Error::ZeroCoupling(i, j));
            }
            pairs.push(((i, j), v));
        }
        pairs.sort_by_key(|a| a.0);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateCoupling(w[0].0 .0, w[0].0 .1));
        }
        let (edges, values) = pairs.into_iter().unzip();
        Ok(Self {
            num_spins,
            fields,
            edges,
            values,
        })
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn num_couplers(&self) -> usize {
        self.edges.len()
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields[i]
    }

    /// Coupler keys in coupler-index order.
    pub fn edges(&self) -> &[Coupler] {
        &self.edges
    }

    /// Coupling values in coupler-index order.
    pub fn coupling_values(&self) -> &[f64] {
        &self.values
    }

    pub fn couplings(&self) -> impl Iterator<Item = (Coupler, f64)> + '_ {
        self.edges.iter().copied().zip(self.values.iter().copied())
    }

    pub fn coupler_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edges.binary_search(&key).ok()
    }

    pub fn coupling(&self, i: usize, j: usize) -> Option<f64> {
        self.coupler_index(i, j).map(|k| self.values[k])
    }

    /// Neighbor lists `(neighbor, coupler index)` for every spin.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.num_spins];
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            adj[i].push((j, k));
            adj[j].push((i, k));
        }
        adj
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == i || b == i)
            .count()
    }

    /// Same graph with new fields and coupling values (coupler-index order).
    pub fn with_values(&self, fields: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if fields.len() != self.num_spins {
            return Err(Error::LengthMismatch {
                expected: self.num_spins,
                got: fields.len(),
            });
        }
        if values.len() != self.edges.len() {
            return Err(Error::LengthMismatch {
                expected: self.edges.len(),
                got: values.len(),
            });
        }
        Self::new(
            self.num_spins,
            fields,
            self.edges.iter().copied().zip(values),
        )
    }

    /// Σ h_i s_i + Σ J_ij s_i s_j.
    pub fn energy(&self, state: &[i8]) -> Result<f64> {
        if state.len() != self.num_spins {
            return Err(Error::LengthMismatch {
                expected: self.num_spins,
                got: state.len(),
            });
        }
        let linear: f64 = self
            .fields
            .iter()
            .zip(state)
            .map(|(h, &s)| h * f64::from(s))
            .sum();
        let quadratic: f64 = self
            .couplings()
            .map(|((i, j), v)| v * f64::from(state[i]) * f64::from(state[j]))
            .sum();
        Ok(linear + quadratic)
    }

    /// Per-coupler frustration indicator `(1 + sign(J) s_i s_j) / 2` as 0 or 1.
    pub fn frustrated(&self, state: &[i8]) -> Vec<u8> {
        self.couplings()
            .map(|((i, j), v)| {
                let prod = i32::from(state[i]) * i32::from(state[j]);
                u8::from((v > 0.0) == (prod > 0))
            })
            .collect()
    }

    pub fn apply_gauge(&self, gauge: &GaugeTransform) -> Self {
        let flipped = |i: usize| gauge.flips(i);
        let fields = self
            .fields
            .iter()
            .enumerate()
            .map(|(i, &h)| if flipped(i) { -h } else { h })
            .collect();
        let values = self
            .couplings()
            .map(|((i, j), v)| if flipped(i) != flipped(j) { -v } else { v })
            .collect();
        Self {
            num_spins: self.num_spins,
            fields,
            edges: self.edges.clone(),
            values,
        }
    }

    /// Model induced on the first `n` spins (couplers among them only).
    pub fn restrict(&self, n: usize) -> Self {
        let (edges, values) = self.couplings().filter(|&((_, j), _)| j < n).unzip();
        Self {
            num_spins: n,
            fields: self.fields[..n.min(self.num_spins)].to_vec(),
            edges,
            values,
        }
    }
}

/// Spin-reversal (gauge) transformation: flips the spins in `flip_set`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeTransform {
    flip_set: BTreeSet<usize>,
}

impl GaugeTransform {
    pub fn new(flip_set: impl IntoIterator<Item = usize>) -> Self {
        Self {
            flip_set: flip_set.into_iter().collect(),
        }
    }

    /// Gauge from a ±1 vector: spin `i` is flipped where `signs[i] < 0`.
    pub fn from_signs(signs: &[i8]) -> Self {
        Self::new(
            signs
                .iter()
                .enumerate()
                .filter(|(_, &s)| s < 0)
                .map(|(i, _)| i),
        )
    }

    pub fn flips(&self, i: usize) -> bool {
        self.flip_set.contains(&i)
    }

    pub fn flip_set(&self) -> &BTreeSet<usize> {
        &self.flip_set
    }

    pub fn validate(&self, num_spins: usize) -> Result<()> {
        match self.flip_set.iter().next_back() {
            Some(&i) if i >= num_spins => Err(Error::SpinOutOfRange {
                index: i,
                num_spins,
            }),
            _ => Ok(()),
        }
    }

    /// Applies the gauge to a spin state.
    pub fn apply_state(&self, state: &[i8]) -> Vec<i8> {
        state
            .iter()
            .enumerate()
            .map(|(i, &s)| if self.flips(i) { -s } else { s })
            .collect()
    }
}
