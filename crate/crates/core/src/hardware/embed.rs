use serde::{Deserialize, Serialize};

use super::search::{find_subgraph, SearchOptions};
use super::topology::{Graph, HardwareGraph};
use crate::error::{Error, Result};
use crate::ising::IsingModel;

/// Pairwise-disjoint subgraph embeddings of one source model: `maps[k][spin] = qubit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSet {
    source: IsingModel,
    maps: Vec<Vec<usize>>,
}

impl EmbeddingSet {
    /// Validates every map against `hw` (injective, operable qubits, couplers on
    /// hardware edges) and checks the maps are pairwise disjoint.
    pub fn new(source: IsingModel, maps: Vec<Vec<usize>>, hw: &HardwareGraph) -> Result<Self> {
        let n = source.num_spins();
        let mut owner = vec![usize::MAX; hw.num_qubits()];
        for (k, map) in maps.iter().enumerate() {
            if map.len() != n {
                return Err(Error::InconsistentEmbedding(format!(
                    "map {k} has {} entries for a {n}-spin model",
                    map.len()
                )));
            }
            for &q in map {
                if q >= hw.num_qubits() || !hw.is_operable(q) {
                    return Err(Error::InconsistentEmbedding(format!(
                        "map {k} uses unavailable qubit {q}"
                    )));
                }
                if owner[q] != usize::MAX {
                    return Err(Error::InconsistentEmbedding(format!(
                        "qubit {q} is used by maps {} and {k}",
                        owner[q]
                    )));
                }
                owner[q] = k;
            }
            if let Some(&(i, j)) = source
                .edges()
                .iter()
                .find(|&&(i, j)| !hw.usable_edge(map[i], map[j]))
            {
                return Err(Error::InconsistentEmbedding(format!(
                    "map {k} sends coupler ({i}, {j}) to a non-edge"
                )));
            }
        }
        Ok(Self { source, maps })
    }

    pub fn source(&self) -> &IsingModel {
        &self.source
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Keeps only the first `count` maps.
    pub fn truncate(&mut self, count: usize) {
        self.maps.truncate(count);
    }

    /// Qubit of every copied spin in copy-major order: entry `k n + s` is `maps[k][s]`.
    pub fn flat_qubits(&self) -> Vec<usize> {
        self.maps.iter().flatten().copied().collect()
    }

    /// Disjoint union of the copies of `model` on spins `k n + s`. Coupler `c` of copy
    /// `k` has index `k |E| + c`. `model` must share the source's coupler graph.
    pub fn copies_model(&self, model: &IsingModel) -> Result<IsingModel> {
        self.check_compatible(model)?;
        let n = model.num_spins();
        let fields = (0..self.len())
            .flat_map(|_| model.fields().iter().copied())
            .collect();
        IsingModel::new(
            n * self.len(),
            fields,
            (0..self.len()).flat_map(|k| {
                model
                    .couplings()
                    .map(move |((i, j), v)| ((k * n + i, k * n + j), v))
            }),
        )
    }

    fn check_compatible(&self, model: &IsingModel) -> Result<()> {
        if model.num_spins() != self.source.num_spins() || model.edges() != self.source.edges() {
            return Err(Error::InconsistentEmbedding(
                "model does not share the embedded source's coupler graph".into(),
            ));
        }
        Ok(())
    }

    /// The maps as JSON (`[[q, ...], ...]`).
    pub fn maps_json(&self) -> String {
        serde_json::to_string(&self.maps).expect("integer lists serialize")
    }
}

/// Hardware made of `copies` disjoint copies of `model`'s coupler graph (one cell per
/// copy) together with the identity embeddings onto it. Useful when no physical
/// topology is of interest.
pub fn standalone_copies(
    model: &IsingModel,
    copies: usize,
) -> Result<(HardwareGraph, EmbeddingSet)> {
    if copies == 0 {
        return Err(Error::InvalidDimensions("need at least one copy".into()));
    }
    let n = model.num_spins();
    let edges: Vec<(usize, usize)> = (0..copies)
        .flat_map(|k| {
            model
                .edges()
                .iter()
                .map(move |&(i, j)| (k * n + i, k * n + j))
        })
        .collect();
    let cells = (0..copies)
        .map(|k| ((0, k as i64), (k * n..(k + 1) * n).collect()))
        .collect();
    let hw = HardwareGraph::new(format!("standalone:{copies}"), n * copies, &edges, cells)?;
    let maps = (0..copies)
        .map(|k| (k * n..(k + 1) * n).collect())
        .collect();
    let es = EmbeddingSet::new(model.clone(), maps, &hw)?;
    Ok((hw, es))
}

/// Programs `model` through every map onto a hardware-indexed model with `num_qubits`
/// spins; unused qubits get no field and no couplers.
pub fn program_embeddings(
    model: &IsingModel,
    embeddings: &EmbeddingSet,
    num_qubits: usize,
) -> Result<IsingModel> {
    embeddings.check_compatible(model)?;
    let mut fields = vec![0.0; num_qubits];
    let mut owner = vec![false; num_qubits];
    let mut couplings = Vec::with_capacity(embeddings.len() * model.num_couplers());
    for map in embeddings.maps() {
        for (s, &q) in map.iter().enumerate() {
            if q >= num_qubits || std::mem::replace(&mut owner[q], true) {
                return Err(Error::InconsistentEmbedding(format!("qubit {q} collides")));
            }
            fields[q] = model.fields()[s];
        }
        couplings.extend(model.couplings().map(|((i, j), v)| ((map[i], map[j]), v)));
    }
    IsingModel::new(num_qubits, fields, couplings)
}

/// Settings for [`raster_embed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RasterOptions {
    /// Window size in cells, `(rows, columns)`.
    pub block: (usize, usize),
    /// Node budget of each subgraph search; an exhausted search moves to the next window.
    pub search_budget: u64,
    /// Stop after this many copies.
    pub max_copies: usize,
    /// Root-order seed passed to the subgraph search.
    pub seed: Option<u64>,
}

impl Default for RasterOptions {
    fn default() -> Self {
        Self {
            block: (2, 2),
            search_budget: 100_000,
            max_copies: usize::MAX,
            seed: None,
        }
    }
}

/// Greedy packing of disjoint copies of `source`: windows of `block` cells are scanned
/// in row-major order and, within each window, copies are searched among operable,
/// still-unused qubits and accepted one at a time until none is found.
///
/// Fails with [`Error::BudgetExceeded`] when nothing was found and some search ran out
/// of budget; an empty set means the search space was exhausted.
pub fn raster_embed(
    source: &IsingModel,
    hw: &HardwareGraph,
    options: RasterOptions,
) -> Result<EmbeddingSet> {
    let (bh, bw) = options.block;
    if bh == 0 || bw == 0 {
        return Err(Error::InvalidDimensions(
            "block must be at least 1x1".into(),
        ));
    }
    let pattern = Graph::from_model(source);
    let n = pattern.num_vertices();
    let mut maps = Vec::new();
    if n == 0 || n > hw.num_operable() {
        return EmbeddingSet::new(source.clone(), maps, hw);
    }
    let ((y_lo, x_lo), (y_hi, x_hi)) = hw.cell_bounds();
    let y_last = (y_hi - bh as i64 + 1).max(y_lo);
    let x_last = (x_hi - bw as i64 + 1).max(x_lo);
    let mut used = vec![false; hw.num_qubits()];
    let mut truncated = false;
    let search = SearchOptions {
        limit: 1,
        budget: options.search_budget,
        seed: options.seed,
    };
    'windows: for y0 in y_lo..=y_last {
        for x0 in x_lo..=x_last {
            loop {
                if maps.len() >= options.max_copies {
                    break 'windows;
                }
                let mut qubits: Vec<usize> = hw
                    .cells()
                    .range((y0, x0)..(y0 + bh as i64, i64::MIN))
                    .filter(|(&(_, x), _)| x >= x0 && x < x0 + bw as i64)
                    .flat_map(|(_, members)| members.iter().copied())
                    .filter(|&q| hw.is_operable(q) && !used[q])
                    .collect();
                if qubits.len() < n {
                    break;
                }
                qubits.sort_unstable();
                let window = hw.graph().induced(&qubits);
                let found = find_subgraph(&pattern, &window, search)?;
                truncated |= found.truncated;
                let Some(local) = found.maps.into_iter().next() else {
                    break;
                };
                let map: Vec<usize> = local.iter().map(|&l| qubits[l]).collect();
                for &q in &map {
                    used[q] = true;
                }
                maps.push(map);
            }
        }
    }
    if maps.is_empty() && truncated {
        return Err(Error::BudgetExceeded(options.search_budget));
    }
    EmbeddingSet::new(source.clone(), maps, hw)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::hardware::{make_chimera, make_pegasus, mask_qubits};
    use crate::ising::{make_fm_loop, make_frustrated_loop};

    #[test]
    fn standalone_copies_are_identity_maps() {
        let lp = make_fm_loop(5, -1.0).unwrap();
        let (hw, es) = standalone_copies(&lp, 3).unwrap();
        assert_eq!(hw.num_qubits(), 15);
        assert_eq!(es.flat_qubits(), (0..15).collect::<Vec<_>>());
        assert_eq!(
            program_embeddings(&lp, &es, 15).unwrap(),
            es.copies_model(&lp).unwrap()
        );
        assert!(standalone_copies(&lp, 0).is_err());
    }

    #[test]
    fn chimera_packing_of_four_cycles() {
        let hw = make_chimera(2, 2, 4).unwrap();
        let loop4 = make_fm_loop(4, -1.0).unwrap();
        let es = raster_embed(&loop4, &hw, RasterOptions::default()).unwrap();
        assert_eq!(es.len(), 8);
        let used: BTreeSet<usize> = es.flat_qubits().into_iter().collect();
        assert_eq!(used.len(), 32);
    }

    #[test]
    fn masking_reduces_copies() {
        let hw = make_chimera(1, 1, 4).unwrap();
        let loop4 = make_fm_loop(4, -1.0).unwrap();
        let opts = RasterOptions {
            block: (1, 1),
            ..RasterOptions::default()
        };
        let before = raster_embed(&loop4, &hw, opts).unwrap().len();
        let masked = mask_qubits(&hw, &BTreeSet::from([0])).unwrap();
        let after = raster_embed(&loop4, &masked, opts).unwrap().len();
        assert_eq!((before, after), (2, 1));
        let dead = mask_qubits(&hw, &(0..8).collect()).unwrap();
        assert!(raster_embed(&loop4, &dead, opts).unwrap().is_empty());
    }

    #[test]
    fn oversized_pattern_gives_empty_set() {
        let hw = make_chimera(1, 1, 4).unwrap();
        let big = make_fm_loop(10, -1.0).unwrap();
        assert!(raster_embed(&big, &hw, RasterOptions::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn programmed_copies() {
        let hw = make_pegasus(3).unwrap();
        let source = make_frustrated_loop(6, -1.0).unwrap();
        let es = raster_embed(&source, &hw, RasterOptions::default()).unwrap();
        assert!(es.len() > 3);
        let physical = program_embeddings(&source, &es, hw.num_qubits()).unwrap();
        assert_eq!(physical.num_couplers(), es.len() * source.num_couplers());
        for map in es.maps() {
            for ((i, j), v) in source.couplings() {
                assert_eq!(physical.coupling(map[i], map[j]), Some(v));
            }
        }
        let copies = es.copies_model(&source).unwrap();
        assert_eq!(copies.num_spins(), es.len() * 6);
        assert_eq!(copies.coupling_values()[7], source.coupling_values()[1]);
    }

    #[test]
    fn validation_rejects_bad_sets() {
        let hw = make_chimera(1, 1, 4).unwrap();
        let loop4 = make_fm_loop(4, -1.0).unwrap();
        let good = vec![0, 4, 1, 5];
        assert!(EmbeddingSet::new(loop4.clone(), vec![good.clone()], &hw).is_ok());
        assert!(EmbeddingSet::new(loop4.clone(), vec![good.clone(), good.clone()], &hw).is_err());
        assert!(EmbeddingSet::new(loop4.clone(), vec![vec![0, 1, 4, 5]], &hw).is_err());
        assert!(EmbeddingSet::new(loop4, vec![vec![0, 4, 1]], &hw).is_err());
    }
}
