use std::collections::BTreeMap;

use rand::Rng;

use super::{Coupler, IsingModel};
use crate::error::{Error, Result};
use crate::rng;

/// Periodic chain of `length` spins with every coupling equal to `coupling`.
pub fn make_fm_loop(length: usize, coupling: f64) -> Result<IsingModel> {
    loop_with(length, coupling, false)
}

/// Like [`make_fm_loop`] but the coupler `(0, 1)` carries `-coupling`.
pub fn make_frustrated_loop(length: usize, coupling: f64) -> Result<IsingModel> {
    loop_with(length, coupling, true)
}

fn loop_with(length: usize, coupling: f64, frustrate: bool) -> Result<IsingModel> {
    if length < 3 {
        return Err(Error::InvalidDimensions(format!(
            "a loop needs at least 3 spins, got {length}"
        )));
    }
    IsingModel::new(
        length,
        vec![],
        (0..length).map(|i| {
            let v = if frustrate && i == 0 {
                -coupling
            } else {
                coupling
            };
            ((i, (i + 1) % length), v)
        }),
    )
}

/// Zero-field spin glass on `graph`'s couplers with couplings `±magnitude`, signs drawn
/// from realization `index` of `seed`.
pub fn make_spin_glass(
    graph: &IsingModel,
    magnitude: f64,
    seed: u64,
    index: u64,
) -> Result<IsingModel> {
    let mut rng = rng::rng_for(seed, rng::STREAM_MODELS, index);
    IsingModel::new(
        graph.num_spins(),
        vec![],
        graph
            .edges()
            .iter()
            .map(|&e| {
                (
                    e,
                    if rng.random::<bool>() {
                        magnitude
                    } else {
                        -magnitude
                    },
                )
            })
            .collect::<Vec<_>>(),
    )
}

/// Icosahedron: vertex 0 on top, 1..=5 upper ring, 6..=10 lower ring, 11 at the bottom.
const ICOSAHEDRON: [(usize, usize); 30] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (0, 5),
    (1, 2),
    (2, 3),
    (3, 4),
    (4, 5),
    (1, 5),
    (1, 6),
    (1, 7),
    (2, 7),
    (2, 8),
    (3, 8),
    (3, 9),
    (4, 9),
    (4, 10),
    (5, 10),
    (5, 6),
    (6, 7),
    (7, 8),
    (8, 9),
    (9, 10),
    (6, 10),
    (6, 11),
    (7, 11),
    (8, 11),
    (9, 11),
    (10, 11),
];

/// Truncated-icosahedron adjacency with all couplings `+1` and no fields.
///
/// Vertices are the directed icosahedron edges `u -> v` (sorted), i.e. the corner of the
/// pentagon around `u` pointing at `v`. Pentagon edges join `u -> v` and `u -> w` when
/// `v ~ w`; hexagon-hexagon edges join `u -> v` and `v -> u`.
pub fn make_buckyball() -> IsingModel {
    let (model, _) = buckyball_with_kinds();
    model
}

/// The buckyball together with a per-coupler flag: `true` for hexagon-hexagon edges.
pub(crate) fn buckyball_with_kinds() -> (IsingModel, Vec<bool>) {
    let mut adjacent = [[false; 12]; 12];
    for &(a, b) in &ICOSAHEDRON {
        adjacent[a][b] = true;
        adjacent[b][a] = true;
    }
    let mut darts: Vec<(usize, usize)> = ICOSAHEDRON
        .iter()
        .flat_map(|&(a, b)| [(a, b), (b, a)])
        .collect();
    darts.sort_unstable();
    let index: BTreeMap<(usize, usize), usize> =
        darts.iter().enumerate().map(|(k, &d)| (d, k)).collect();

    let mut kinds: BTreeMap<Coupler, bool> = BTreeMap::new();
    for &(a, b) in &ICOSAHEDRON {
        let (x, y) = (index[&(a, b)], index[&(b, a)]);
        kinds.insert((x.min(y), x.max(y)), true);
    }
    for u in 0..12 {
        for v in 0..12 {
            for w in (v + 1)..12 {
                if adjacent[u][v] && adjacent[u][w] && adjacent[v][w] {
                    let (x, y) = (index[&(u, v)], index[&(u, w)]);
                    kinds.insert((x.min(y), x.max(y)), false);
                }
            }
        }
    }
    let model = IsingModel::new(60, vec![], kinds.keys().map(|&e| (e, 1.0)))
        .expect("buckyball edge list is valid");
    let flags = model.edges().iter().map(|e| kinds[e]).collect();
    (model, flags)
}

/// Square lattice on a cylinder, with two-spin chains that contract to a triangular lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareCylinder {
    pub rows: usize,
    pub cols: usize,
    pub model: IsingModel,
    pub chain_pairs: Vec<Coupler>,
}

impl SquareCylinder {
    /// Spin index of lattice site `(row, col)`.
    pub fn site(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Non-chain couplers with both ends on the same open boundary column.
    pub fn boundary_couplers(&self) -> Vec<usize> {
        let last = self.cols - 1;
        self.model
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| {
                let (ci, cj) = (i % self.cols, j % self.cols);
                ci == cj && (ci == 0 || ci == last) && !self.chain_pairs.contains(&(i, j))
            })
            .map(|(k, _)| k)
            .collect()
    }

    /// Coupler indices of chain (FM) couplers.
    pub fn chain_couplers(&self) -> Vec<usize> {
        self.chain_pairs
            .iter()
            .map(|&(i, j)| self.model.coupler_index(i, j).expect("chain is coupled"))
            .collect()
    }
}

/// `rows x cols` square lattice, periodic in the row direction, open across columns.
///
/// Chains are vertical pairs staggered like bricks: column `c` pairs rows
/// `(2k + c % 2, 2k + 1 + c % 2)` (mod `rows`). Chain couplers get `-2 * afm` and every
/// other lattice coupler gets `afm`; contracting the chains leaves each logical spin
/// coupled to six distinct neighbors (four on the open boundary columns).
pub fn make_square_cylinder(rows: usize, cols: usize, afm: f64) -> Result<SquareCylinder> {
    if rows < 6 || !rows.is_multiple_of(2) {
        return Err(Error::InvalidDimensions(format!(
            "rows must be even and at least 6, got {rows}"
        )));
    }
    if cols < 2 {
        return Err(Error::InvalidDimensions(format!(
            "cols must be at least 2, got {cols}"
        )));
    }
    let site = |r: usize, c: usize| (r % rows) * cols + c;
    let mut chain_pairs = Vec::new();
    for c in 0..cols {
        for k in 0..rows / 2 {
            let top = 2 * k + c % 2;
            let (a, b) = (site(top, c), site(top + 1, c));
            chain_pairs.push((a.min(b), a.max(b)));
        }
    }
    chain_pairs.sort_unstable();
    let mut couplings = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let s = site(r, c);
            let down = site(r + 1, c);
            let key = (s.min(down), s.max(down));
            let v = if chain_pairs.binary_search(&key).is_ok() {
                -2.0 * afm
            } else {
                afm
            };
            couplings.push((key, v));
            if c + 1 < cols {
                couplings.push(((s, site(r, c + 1)), afm));
            }
        }
    }
    let model = IsingModel::new(rows * cols, vec![], couplings)?;
    Ok(SquareCylinder {
        rows,
        cols,
        model,
        chain_pairs,
    })
}

/// Contracts each chain pair into one logical spin. Logical ids are assigned in order of
/// each group's smallest physical spin; parallel couplings add; chain couplers vanish.
/// Fields of chain members add as well.
pub fn contract_chains(
    model: &IsingModel,
    chain_pairs: &[Coupler],
) -> Result<(IsingModel, Vec<usize>)> {
    let n = model.num_spins();
    let mut partner: Vec<Option<usize>> = vec![None; n];
    for &(a, b) in chain_pairs {
        for x in [a, b] {
            if x >= n {
                return Err(Error::SpinOutOfRange {
                    index: x,
                    num_spins: n,
                });
            }
            if partner[x].is_some() || a == b {
                return Err(Error::OverlappingChains(x));
            }
        }
        if model.coupler_index(a, b).is_none() {
            return Err(Error::UncoupledChain(a, b));
        }
        partner[a] = Some(b);
        partner[b] = Some(a);
    }
    let mut logical_of = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        if logical_of[i] == usize::MAX {
            logical_of[i] = next;
            if let Some(p) = partner[i] {
                logical_of[p] = next;
            }
            next += 1;
        }
    }
    let mut fields = vec![0.0; next];
    for (i, &h) in model.fields().iter().enumerate() {
        fields[logical_of[i]] += h;
    }
    let mut summed: BTreeMap<Coupler, f64> = BTreeMap::new();
    for ((i, j), v) in model.couplings() {
        let (a, b) = (logical_of[i], logical_of[j]);
        if a != b {
            *summed.entry((a.min(b), a.max(b))).or_insert(0.0) += v;
        }
    }
    let logical = IsingModel::new(next, fields, summed.into_iter().filter(|&(_, v)| v != 0.0))?;
    Ok((logical, logical_of))
}
