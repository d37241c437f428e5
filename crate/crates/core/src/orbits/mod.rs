//! Qubit and coupler orbits of Ising models.
//!
//! Orbits come from automorphisms of the signed model that commute with the
//! `v_i <-> v̄_i` pairing, i.e. relabelings combined with gauge flips.

mod automorphism;
mod partition;

pub use automorphism::{
    automorphism_generators, automorphism_generators_commuting, Permutation, DEFAULT_BUDGET,
};
pub use partition::{vertex_and_edge_orbits, UnionFind};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardware::EmbeddingSet;
use crate::ising::{build_signed, signed_to_labeled_graph, Coupler, IsingModel, QUANTUM};

/// Orbit assignment for the spins and couplers of one model. Orbit ids are the
/// smallest spin index (qubit orbits) or coupler index (coupler orbits) they contain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbits {
    qubit_orbit: Vec<usize>,
    coupler_orbit: Vec<usize>,
    opposite_qubit: BTreeMap<usize, usize>,
    opposite_coupler: BTreeMap<usize, usize>,
}

impl Orbits {
    /// Builds orbits from raw class assignments, canonicalizing ids. `opposite_*` map
    /// an element to an element of the opposite class.
    fn from_classes(
        qubit_class: &[usize],
        coupler_class: &[usize],
        opposite_qubit: &[(usize, usize)],
        opposite_coupler: &[(usize, usize)],
    ) -> Self {
        let qubit_orbit = canonical(qubit_class);
        let coupler_orbit = canonical(coupler_class);
        let mut oq = BTreeMap::new();
        for &(a, b) in opposite_qubit {
            oq.insert(qubit_orbit[a], qubit_orbit[b]);
            oq.insert(qubit_orbit[b], qubit_orbit[a]);
        }
        let mut oc = BTreeMap::new();
        for &(a, b) in opposite_coupler {
            oc.insert(coupler_orbit[a], coupler_orbit[b]);
            oc.insert(coupler_orbit[b], coupler_orbit[a]);
        }
        Self {
            qubit_orbit,
            coupler_orbit,
            opposite_qubit: oq,
            opposite_coupler: oc,
        }
    }

    /// Every qubit and coupler in its own orbit, no opposites.
    pub fn singletons(model: &IsingModel) -> Self {
        Self {
            qubit_orbit: (0..model.num_spins()).collect(),
            coupler_orbit: (0..model.num_couplers()).collect(),
            opposite_qubit: BTreeMap::new(),
            opposite_coupler: BTreeMap::new(),
        }
    }

    pub fn qubit_orbit(&self) -> &[usize] {
        &self.qubit_orbit
    }

    pub fn coupler_orbit(&self) -> &[usize] {
        &self.coupler_orbit
    }

    pub fn opposite_qubit(&self, orbit: usize) -> Option<usize> {
        self.opposite_qubit.get(&orbit).copied()
    }

    pub fn opposite_coupler(&self, orbit: usize) -> Option<usize> {
        self.opposite_coupler.get(&orbit).copied()
    }

    pub fn opposite_qubit_map(&self) -> &BTreeMap<usize, usize> {
        &self.opposite_qubit
    }

    pub fn opposite_coupler_map(&self) -> &BTreeMap<usize, usize> {
        &self.opposite_coupler
    }

    /// Distinct qubit orbit ids in ascending order.
    pub fn qubit_orbit_ids(&self) -> Vec<usize> {
        distinct(&self.qubit_orbit)
    }

    pub fn coupler_orbit_ids(&self) -> Vec<usize> {
        distinct(&self.coupler_orbit)
    }

    pub fn num_qubit_orbits(&self) -> usize {
        self.qubit_orbit_ids().len()
    }

    pub fn num_coupler_orbits(&self) -> usize {
        self.coupler_orbit_ids().len()
    }

    /// Members of every qubit orbit, keyed by orbit id.
    pub fn qubit_members(&self) -> BTreeMap<usize, Vec<usize>> {
        members(&self.qubit_orbit)
    }

    pub fn coupler_members(&self) -> BTreeMap<usize, Vec<usize>> {
        members(&self.coupler_orbit)
    }

    /// Checks sizes and the value identities orbits promise for `model`.
    pub fn check_against(&self, model: &IsingModel) -> Result<()> {
        if self.qubit_orbit.len() != model.num_spins()
            || self.coupler_orbit.len() != model.num_couplers()
        {
            return Err(Error::InvalidOrbits(
                "orbit maps do not cover the model".into(),
            ));
        }
        let q = |x: f64| (x / QUANTUM).round() as i64;
        let h = model.fields();
        let j = model.coupling_values();
        for (id, ms) in self.qubit_members() {
            if ms.iter().any(|&i| q(h[i]) != q(h[id])) {
                return Err(Error::InvalidOrbits(format!(
                    "unequal fields in qubit orbit {id}"
                )));
            }
            if let Some(o) = self.opposite_qubit(id) {
                if q(h[o]) != -q(h[id]) {
                    return Err(Error::InvalidOrbits(format!(
                        "opposite qubit orbits {id} and {o} lack negated fields"
                    )));
                }
            }
        }
        for (id, ms) in self.coupler_members() {
            if ms.iter().any(|&k| q(j[k].abs()) != q(j[id].abs())) {
                return Err(Error::InvalidOrbits(format!(
                    "unequal coupling magnitudes in coupler orbit {id}"
                )));
            }
            if let Some(o) = self.opposite_coupler(id) {
                if q(j[o]) != -q(j[id]) {
                    return Err(Error::InvalidOrbits(format!(
                        "opposite coupler orbits {id} and {o} lack negated couplings"
                    )));
                }
            }
        }
        for (a, b) in self.opposite_qubit.iter().chain(&self.opposite_coupler) {
            let back = if self.opposite_qubit.get(a) == Some(b) {
                self.opposite_qubit.get(b)
            } else {
                self.opposite_coupler.get(b)
            };
            if back != Some(a) {
                return Err(Error::InvalidOrbits(format!(
                    "opposite of {a} is not symmetric"
                )));
            }
        }
        Ok(())
    }

    /// JSON document with `qubit_orbits`, `coupler_orbits` (keyed `"i,j"`),
    /// `opposite_qubit` and `opposite_coupler`.
    pub fn to_json(&self, model: &IsingModel) -> serde_json::Value {
        let qubits: serde_json::Map<String, serde_json::Value> = self
            .qubit_orbit
            .iter()
            .enumerate()
            .map(|(i, &o)| (i.to_string(), o.into()))
            .collect();
        let couplers: serde_json::Map<String, serde_json::Value> = model
            .edges()
            .iter()
            .zip(&self.coupler_orbit)
            .map(|(&(i, j), &o)| (format!("{i},{j}"), o.into()))
            .collect();
        let opp = |m: &BTreeMap<usize, usize>| -> serde_json::Value {
            m.iter()
                .map(|(a, b)| (a.to_string(), serde_json::Value::from(*b)))
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        serde_json::json!({
            "qubit_orbits": qubits,
            "coupler_orbits": couplers,
            "opposite_qubit": opp(&self.opposite_qubit),
            "opposite_coupler": opp(&self.opposite_coupler),
        })
    }
}

fn canonical(classes: &[usize]) -> Vec<usize> {
    let mut first: BTreeMap<usize, usize> = BTreeMap::new();
    for (x, &c) in classes.iter().enumerate() {
        first.entry(c).or_insert(x);
    }
    classes.iter().map(|c| first[c]).collect()
}

fn distinct(ids: &[usize]) -> Vec<usize> {
    ids.iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn members(ids: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (x, &o) in ids.iter().enumerate() {
        out.entry(o).or_default().push(x);
    }
    out
}

/// Qubit and coupler orbits of `model` with their opposite relations.
pub fn ising_orbits(model: &IsingModel, budget: u64) -> Result<Orbits> {
    let n = model.num_spins();
    let signed = build_signed(model);
    let graph = signed_to_labeled_graph(&signed);
    let gens = automorphism_generators_commuting(&graph, &signed.graph_partner(), budget)?;
    let (vertex_orbit, _) = vertex_and_edge_orbits(&graph, &gens)?;

    let spins = signed.base.num_spins();
    let signed_couplers = signed.base.num_couplers();
    let mut couplers = UnionFind::new(signed_couplers);
    for k in 0..signed_couplers {
        couplers.union(k, vertex_orbit[spins + k] - spins);
    }
    let (p, b) = (&signed.plain_of, &signed.bar_of);
    for &(i, j) in model.edges() {
        couplers.union(signed.coupler(b[i], p[j]), signed.coupler(p[i], b[j]));
        couplers.union(signed.coupler(p[i], p[j]), signed.coupler(b[i], b[j]));
    }

    let qubit_class: Vec<usize> = (0..n).map(|i| vertex_orbit[p[i]]).collect();
    let mut plain_in_orbit: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &c) in qubit_class.iter().enumerate() {
        plain_in_orbit.entry(c).or_insert(i);
    }
    let opposite_qubit: Vec<(usize, usize)> = (0..n)
        .filter_map(|i| plain_in_orbit.get(&vertex_orbit[b[i]]).map(|&k| (i, k)))
        .collect();

    let coupler_class: Vec<usize> = model
        .edges()
        .iter()
        .map(|&(i, j)| couplers.find(signed.coupler(p[i], p[j])))
        .collect();
    let mut plain_coupler_in_class: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, &c) in coupler_class.iter().enumerate() {
        plain_coupler_in_class.entry(c).or_insert(k);
    }
    let opposite_coupler: Vec<(usize, usize)> = model
        .edges()
        .iter()
        .enumerate()
        .filter_map(|(k, &(i, j))| {
            let cross = couplers.find(signed.coupler(b[i], p[j]));
            plain_coupler_in_class.get(&cross).map(|&o| (k, o))
        })
        .collect();

    Ok(Orbits::from_classes(
        &qubit_class,
        &coupler_class,
        &opposite_qubit,
        &opposite_coupler,
    ))
}

impl Orbits {
    /// Orbits of `copies` disjoint copies of the model, laid out copy-major: spin
    /// `k n + s` and coupler `k |E| + c` join the orbits of `s` and `c`.
    pub fn tile_copies(&self, copies: usize) -> Orbits {
        let n = self.qubit_orbit.len();
        let e = self.coupler_orbit.len();
        let spin_origin: Vec<Option<usize>> = (0..copies * n).map(|q| Some(q % n)).collect();
        let coupler_origin: Vec<usize> = (0..copies * e).map(|k| k % e).collect();
        tile_orbits(self, &spin_origin, &coupler_origin)
    }
}

/// Lifts source-model orbits to the hardware-indexed model programmed by `embeddings`
/// (see [`crate::hardware::program_embeddings`]): every copy of a source spin or coupler
/// joins that element's orbit. Unused qubits become singleton, self-opposite orbits
/// (they carry no field and no couplers).
pub fn merge_embedding_orbits(
    orbits: &Orbits,
    embeddings: &EmbeddingSet,
    num_qubits: usize,
) -> Result<Orbits> {
    let source = embeddings.source();
    if orbits.qubit_orbit.len() != source.num_spins()
        || orbits.coupler_orbit.len() != source.num_couplers()
    {
        return Err(Error::InconsistentEmbedding(
            "orbits do not match the embedded source model".into(),
        ));
    }
    let physical = crate::hardware::program_embeddings(source, embeddings, num_qubits)?;
    let mut spin_origin: Vec<Option<usize>> = vec![None; num_qubits];
    for map in embeddings.maps() {
        for (s, &q) in map.iter().enumerate() {
            spin_origin[q] = Some(s);
        }
    }
    let coupler_origin: Vec<usize> = physical
        .edges()
        .iter()
        .map(|&(a, b)| {
            let (sa, sb) = (spin_origin[a].unwrap(), spin_origin[b].unwrap());
            source
                .coupler_index(sa, sb)
                .expect("programmed coupler has a source")
        })
        .collect();
    Ok(tile_orbits(orbits, &spin_origin, &coupler_origin))
}

/// Orbits of a model whose spins/couplers are copies of source spins/couplers.
/// `spin_origin[q]` is `None` for spins that belong to no copy.
pub(crate) fn tile_orbits(
    source: &Orbits,
    spin_origin: &[Option<usize>],
    coupler_origin: &[usize],
) -> Orbits {
    let offset = source.qubit_orbit.len();
    let qubit_class: Vec<usize> = spin_origin
        .iter()
        .enumerate()
        .map(|(q, o)| match o {
            Some(s) => source.qubit_orbit[*s],
            None => offset + q,
        })
        .collect();
    let coupler_class: Vec<usize> = coupler_origin
        .iter()
        .map(|&c| source.coupler_orbit[c])
        .collect();

    let mut qubit_rep: BTreeMap<usize, usize> = BTreeMap::new();
    for (q, &c) in qubit_class.iter().enumerate() {
        qubit_rep.entry(c).or_insert(q);
    }
    let mut opposite_qubit: Vec<(usize, usize)> = source
        .opposite_qubit
        .iter()
        .filter_map(|(a, b)| Some((*qubit_rep.get(a)?, *qubit_rep.get(b)?)))
        .collect();
    opposite_qubit.extend(
        spin_origin
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_none())
            .map(|(q, _)| (q, q)),
    );
    let mut coupler_rep: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, &c) in coupler_class.iter().enumerate() {
        coupler_rep.entry(c).or_insert(k);
    }
    let opposite_coupler: Vec<(usize, usize)> = source
        .opposite_coupler
        .iter()
        .filter_map(|(a, b)| Some((*coupler_rep.get(a)?, *coupler_rep.get(b)?)))
        .collect();
    Orbits::from_classes(
        &qubit_class,
        &coupler_class,
        &opposite_qubit,
        &opposite_coupler,
    )
}

/// Explicitly declared orbits, used when the orbits should describe the system being
/// simulated rather than the programmed one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OrbitClasses {
    pub qubit_classes: Vec<Vec<usize>>,
    pub coupler_classes: Vec<Vec<Coupler>>,
    /// Pairs of qubit class indices that are opposite (`(a, a)` for self-opposite).
    #[serde(default)]
    pub qubit_opposites: Vec<(usize, usize)>,
    /// Pairs of coupler class indices that are opposite.
    #[serde(default)]
    pub coupler_opposites: Vec<(usize, usize)>,
}

impl OrbitClasses {
    /// All qubits in one class (self-opposite when every field is zero) and one coupler
    /// class per distinct coupling value: the "infinite lattice" view of a model, where
    /// every bulk coupler of a given kind is equivalent.
    pub fn by_coupling_value(model: &IsingModel) -> Self {
        let mut classes: BTreeMap<i64, Vec<Coupler>> = BTreeMap::new();
        for (e, v) in model.couplings() {
            classes
                .entry((v / QUANTUM).round() as i64)
                .or_default()
                .push(e);
        }
        let zero_field = model.fields().iter().all(|&h| h == 0.0);
        Self {
            qubit_classes: vec![(0..model.num_spins()).collect()],
            coupler_classes: classes.into_values().collect(),
            qubit_opposites: if zero_field { vec![(0, 0)] } else { vec![] },
            coupler_opposites: vec![],
        }
    }
}

/// Returns the declared partition verbatim (ids canonicalized).
pub fn override_orbits(model: &IsingModel, classes: &OrbitClasses) -> Result<Orbits> {
    let n = model.num_spins();
    let mut qubit_class = vec![usize::MAX; n];
    for (c, members) in classes.qubit_classes.iter().enumerate() {
        for &q in members {
            if q >= n {
                return Err(Error::InvalidOrbits(format!("qubit {q} is out of range")));
            }
            if qubit_class[q] != usize::MAX {
                return Err(Error::InvalidOrbits(format!("qubit {q} is in two classes")));
            }
            qubit_class[q] = c;
        }
    }
    if let Some(q) = qubit_class.iter().position(|&c| c == usize::MAX) {
        return Err(Error::InvalidOrbits(format!("qubit {q} is in no class")));
    }
    let mut coupler_class = vec![usize::MAX; model.num_couplers()];
    for (c, members) in classes.coupler_classes.iter().enumerate() {
        let mut magnitude: Option<i64> = None;
        for &(i, j) in members {
            let k = model.coupler_index(i, j).ok_or_else(|| {
                Error::InvalidOrbits(format!("({i}, {j}) is not a coupler of the model"))
            })?;
            if coupler_class[k] != usize::MAX {
                return Err(Error::InvalidOrbits(format!(
                    "coupler ({i}, {j}) is in two classes"
                )));
            }
            let mag = (model.coupling_values()[k].abs() / QUANTUM).round() as i64;
            if *magnitude.get_or_insert(mag) != mag {
                return Err(Error::InvalidOrbits(format!(
                    "coupler class {c} mixes coupling magnitudes"
                )));
            }
            coupler_class[k] = c;
        }
    }
    if let Some(k) = coupler_class.iter().position(|&c| c == usize::MAX) {
        let (i, j) = model.edges()[k];
        return Err(Error::InvalidOrbits(format!(
            "coupler ({i}, {j}) is in no class"
        )));
    }
    let first = |class: &[usize], c: usize| class.iter().position(|&x| x == c);
    let pairs =
        |class: &[usize], opp: &[(usize, usize)], what: &str| -> Result<Vec<(usize, usize)>> {
            opp.iter()
                .map(|&(a, b)| match (first(class, a), first(class, b)) {
                    (Some(x), Some(y)) => Ok((x, y)),
                    _ => Err(Error::InvalidOrbits(format!(
                        "unknown {what} class in opposite pair"
                    ))),
                })
                .collect()
        };
    let oq = pairs(&qubit_class, &classes.qubit_opposites, "qubit")?;
    let oc = pairs(&coupler_class, &classes.coupler_opposites, "coupler")?;
    let orbits = Orbits::from_classes(&qubit_class, &coupler_class, &oq, &oc);
    orbits.check_against(model)?;
    Ok(orbits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{make_buckyball, make_fm_loop, make_frustrated_loop, make_square_cylinder};

    #[test]
    fn fm_loop_orbits() {
        for l in [3, 4, 7, 64] {
            let m = make_fm_loop(l, -0.2).unwrap();
            let o = ising_orbits(&m, DEFAULT_BUDGET).unwrap();
            assert_eq!(o.num_qubit_orbits(), 1, "L={l}");
            assert_eq!(o.num_coupler_orbits(), 1);
            assert_eq!(o.opposite_qubit(0), Some(0));
            assert_eq!(o.opposite_coupler(0), None);
            o.check_against(&m).unwrap();
        }
    }

    #[test]
    fn frustrated_loop_orbits() {
        for l in [3, 6, 16] {
            let m = make_frustrated_loop(l, -0.9).unwrap();
            let o = ising_orbits(&m, DEFAULT_BUDGET).unwrap();
            assert_eq!(o.num_qubit_orbits(), 1);
            let ids = o.coupler_orbit_ids();
            assert_eq!(ids.len(), 2, "L={l}");
            assert_eq!(o.opposite_coupler(ids[0]), Some(ids[1]));
            assert_eq!(o.opposite_coupler(ids[1]), Some(ids[0]));
            o.check_against(&m).unwrap();
        }
    }

    #[test]
    fn buckyball_orbits() {
        let (m, hex_hex) = crate::ising::buckyball_with_kinds();
        let o = ising_orbits(&m, DEFAULT_BUDGET).unwrap();
        assert_eq!(o.num_qubit_orbits(), 1);
        assert_eq!(o.num_coupler_orbits(), 2);
        // the two orbits are exactly hexagon-hexagon vs pentagon edges
        for (k, &hh) in hex_hex.iter().enumerate() {
            let same_as_first = o.coupler_orbit()[k] == o.coupler_orbit()[0];
            assert_eq!(same_as_first, hh == hex_hex[0]);
        }
        assert_eq!(make_buckyball(), m);
    }

    #[test]
    fn disjoint_union_of_frustrated_loops() {
        let one = make_frustrated_loop(6, -1.0).unwrap();
        let three = IsingModel::new(
            18,
            vec![],
            (0..3).flat_map(|c| {
                one.couplings()
                    .map(move |((i, j), v)| ((6 * c + i, 6 * c + j), v))
            }),
        )
        .unwrap();
        let o = ising_orbits(&three, DEFAULT_BUDGET).unwrap();
        assert_eq!(o.num_qubit_orbits(), 1);
        let ids = o.coupler_orbit_ids();
        assert_eq!(ids.len(), 2);
        assert_eq!(o.opposite_coupler(ids[0]), Some(ids[1]));
    }

    #[test]
    fn fields_break_flip_symmetry() {
        let m = IsingModel::new(2, vec![0.5, -0.5], []).unwrap();
        let o = ising_orbits(&m, DEFAULT_BUDGET).unwrap();
        assert_eq!(o.num_qubit_orbits(), 2);
        assert_eq!(o.opposite_qubit(0), Some(1));
        let single = IsingModel::new(1, vec![0.5], []).unwrap();
        let o = ising_orbits(&single, DEFAULT_BUDGET).unwrap();
        assert_eq!(o.opposite_qubit(0), None);
    }

    #[test]
    fn override_classes() {
        let cyl = make_square_cylinder(6, 4, 0.9).unwrap();
        let classes = OrbitClasses::by_coupling_value(&cyl.model);
        let o = override_orbits(&cyl.model, &classes).unwrap();
        assert_eq!(o.num_coupler_orbits(), 2);
        assert_eq!(o.num_qubit_orbits(), 1);

        let m = make_frustrated_loop(5, -1.0).unwrap();
        let singles = OrbitClasses {
            qubit_classes: (0..5).map(|i| vec![i]).collect(),
            coupler_classes: m.edges().iter().map(|&e| vec![e]).collect(),
            ..Default::default()
        };
        let o = override_orbits(&m, &singles).unwrap();
        assert_eq!(o, Orbits::singletons(&m));

        let mixed = OrbitClasses {
            qubit_classes: vec![(0..cyl.model.num_spins()).collect()],
            coupler_classes: vec![cyl.model.edges().to_vec()],
            ..Default::default()
        };
        assert!(matches!(
            override_orbits(&cyl.model, &mixed),
            Err(Error::InvalidOrbits(_))
        ));
        let missing = OrbitClasses {
            qubit_classes: vec![vec![0]],
            ..Default::default()
        };
        assert!(override_orbits(&m, &missing).is_err());
    }

    #[test]
    fn json_document_shape() {
        let m = make_frustrated_loop(4, -1.0).unwrap();
        let o = ising_orbits(&m, DEFAULT_BUDGET).unwrap();
        let doc = o.to_json(&m);
        assert_eq!(doc["qubit_orbits"]["3"], 0);
        assert!(doc["coupler_orbits"]["0,1"].is_u64());
        assert_eq!(doc["opposite_qubit"]["0"], 0);
        assert_eq!(doc["opposite_coupler"].as_object().unwrap().len(), 2);
    }
}
