//! Observables consumed by the shims: magnetizations, frustration probabilities,
//! orbit targets, dispersion, the triangular order parameter and the random-walk
//! exponent used for step-size adaptation.

mod series;
mod triangular;

pub use series::{dispersion, fit_walk_exponent, IterationRecord, ObservableSeries};
pub use triangular::{decode_chains, order_parameter, three_coloring, SublatticeColoring};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::orbits::Orbits;
use crate::sampler::SampleSet;

/// Column means `m_i = <s_i>`.
pub fn magnetizations(samples: &SampleSet) -> Vec<f64> {
    let mut sums = vec![0i64; samples.num_spins()];
    for read in samples.reads() {
        for (acc, &s) in sums.iter_mut().zip(read) {
            *acc += i64::from(s);
        }
    }
    let reads = samples.num_reads().max(1) as f64;
    sums.into_iter().map(|x| x as f64 / reads).collect()
}

/// `f_ij = (1 + sign(J_ij) <s_i s_j>) / 2`: the probability that coupler `ij` raises
/// the energy.
pub fn frustrations(samples: &SampleSet, model: &IsingModel) -> Result<Vec<f64>> {
    if samples.num_spins() != model.num_spins() {
        return Err(Error::LengthMismatch {
            expected: model.num_spins(),
            got: samples.num_spins(),
        });
    }
    let mut counts = vec![0usize; model.num_couplers()];
    for read in samples.reads() {
        for (k, (&(i, j), &v)) in model
            .edges()
            .iter()
            .zip(model.coupling_values())
            .enumerate()
        {
            if (read[i] == read[j]) == (v > 0.0) {
                counts[k] += 1;
            }
        }
    }
    let reads = samples.num_reads().max(1) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / reads).collect())
}

/// Per-orbit targets `(m̄ by qubit orbit, f̄ by coupler orbit)`; see [`qubit_targets`]
/// and [`coupler_targets`].
pub fn orbit_means(
    m: &[f64],
    f: &[f64],
    orbits: &Orbits,
) -> Result<(BTreeMap<usize, f64>, BTreeMap<usize, f64>)> {
    Ok((qubit_targets(m, orbits)?, coupler_targets(f, orbits)?))
}

/// Target magnetization of every qubit orbit. A qubit orbit that is its own opposite
/// has target 0; an opposite pair `(O, -O)` shares
/// `m̄_O = (Σ_O m - Σ_{-O} m) / (|O| + |-O|)` with `m̄_{-O} = -m̄_O`; any other orbit
/// targets its own mean.
pub fn qubit_targets(m: &[f64], orbits: &Orbits) -> Result<BTreeMap<usize, f64>> {
    if m.len() != orbits.qubit_orbit().len() {
        return Err(Error::LengthMismatch {
            expected: orbits.qubit_orbit().len(),
            got: m.len(),
        });
    }
    let qubit_sums = sums(m, orbits.qubit_orbit());
    let mut m_bar = BTreeMap::new();
    for (&o, &(sum, count)) in &qubit_sums {
        let target = match orbits.opposite_qubit(o) {
            Some(p) if p == o => 0.0,
            Some(p) => {
                let (ps, pc) = qubit_sums[&p];
                (sum - ps) / (count + pc) as f64
            }
            None => sum / count as f64,
        };
        m_bar.insert(o, target);
    }
    Ok(m_bar)
}

/// Target frustration of every coupler orbit: the mean of `f` over the orbit and its
/// opposite.
pub fn coupler_targets(f: &[f64], orbits: &Orbits) -> Result<BTreeMap<usize, f64>> {
    if f.len() != orbits.coupler_orbit().len() {
        return Err(Error::LengthMismatch {
            expected: orbits.coupler_orbit().len(),
            got: f.len(),
        });
    }
    let coupler_sums = sums(f, orbits.coupler_orbit());
    let mut f_bar = BTreeMap::new();
    for (&o, &(sum, count)) in &coupler_sums {
        let target = match orbits.opposite_coupler(o) {
            Some(p) if p != o => {
                let (ps, pc) = coupler_sums[&p];
                (sum + ps) / (count + pc) as f64
            }
            _ => sum / count as f64,
        };
        f_bar.insert(o, target);
    }
    Ok(f_bar)
}

fn sums(values: &[f64], ids: &[usize]) -> BTreeMap<usize, (f64, usize)> {
    let mut out: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (&v, &o) in values.iter().zip(ids) {
        let e = out.entry(o).or_default();
        e.0 += v;
        e.1 += 1;
    }
    out
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
