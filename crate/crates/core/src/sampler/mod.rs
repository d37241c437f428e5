//! Simulated annealer: annealed Metropolis sampling of a distorted Ising model, and
//! exact Boltzmann statistics by enumeration.

mod noise;

pub use noise::{NoiseModel, NoiseParams, DEFAULT_FBO_SCALE};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::rng;

/// Annealing schedule and read count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerParams {
    pub reads: usize,
    pub sweeps: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
    pub seed: u64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            reads: 100,
            sweeps: 1000,
            beta_initial: 0.1,
            beta_final: 3.0,
            seed: 0,
        }
    }
}

impl SamplerParams {
    pub fn validate(&self) -> Result<()> {
        if self.reads == 0 || self.sweeps == 0 {
            return Err(Error::InvalidParameter(
                "reads and sweeps must be positive".into(),
            ));
        }
        if !(self.beta_initial > 0.0
            && self.beta_initial <= self.beta_final
            && self.beta_final.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "need 0 < beta_initial <= beta_final, got {} and {}",
                self.beta_initial, self.beta_final
            )));
        }
        Ok(())
    }

    /// Inverse temperature of every sweep, geometric from `beta_initial` to `beta_final`.
    pub fn schedule(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.beta_final];
        }
        let ratio = self.beta_final / self.beta_initial;
        (0..self.sweeps)
            .map(|s| self.beta_initial * ratio.powf(s as f64 / (self.sweeps - 1) as f64))
            .collect()
    }
}

/// Where a sample set came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model_hash: u64,
    pub params: SamplerParams,
    pub call: u64,
}

/// `reads x num_spins` matrix of ±1 spins, stored read-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    num_spins: usize,
    states: Vec<i8>,
    provenance: Option<Provenance>,
}

impl SampleSet {
    /// Builds a sample set from explicit reads; every entry must be ±1.
    pub fn new(num_spins: usize, reads: Vec<Vec<i8>>) -> Result<Self> {
        let mut states = Vec::with_capacity(num_spins * reads.len());
        for read in reads {
            if read.len() != num_spins {
                return Err(Error::LengthMismatch {
                    expected: num_spins,
                    got: read.len(),
                });
            }
            if read.iter().any(|&s| s != 1 && s != -1) {
                return Err(Error::InvalidParameter("spins must be +1 or -1".into()));
            }
            states.extend(read);
        }
        Ok(Self {
            num_spins,
            states,
            provenance: None,
        })
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn num_reads(&self) -> usize {
        self.states.len().checked_div(self.num_spins).unwrap_or(0)
    }

    pub fn read(&self, r: usize) -> &[i8] {
        &self.states[r * self.num_spins..(r + 1) * self.num_spins]
    }

    pub fn reads(&self) -> impl Iterator<Item = &[i8]> + '_ {
        self.states.chunks_exact(self.num_spins.max(1))
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Spins `range` of every read as a new sample set (one embedded copy).
    pub fn columns(&self, range: std::ops::Range<usize>) -> Self {
        let states = self
            .reads()
            .flat_map(|read| read[range.clone()].iter().copied())
            .collect();
        Self {
            num_spins: range.len(),
            states,
            provenance: self.provenance,
        }
    }
}

/// FNV-1a over the model's spin count, fields and couplings.
pub fn model_hash(model: &IsingModel) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(model.num_spins() as u64);
    for f in model.fields() {
        eat(f.to_bits());
    }
    for ((i, j), v) in model.couplings() {
        eat(i as u64);
        eat(j as u64);
        eat(v.to_bits());
    }
    h
}

/// The model the annealer actually samples when `model` is programmed with flux
/// offsets `fbos`; crosstalk is computed from `model`'s own couplings.
pub fn effective_model(model: &IsingModel, fbos: &[f64], noise: &NoiseModel) -> Result<IsingModel> {
    effective_model_with_reference(model, model, fbos, noise)
}

/// As [`effective_model`], with crosstalk computed from the couplings of `reference`
/// (the nominal, unshimmed model) so the disturbance stays static while `model`'s
/// couplings are being adjusted.
pub fn effective_model_with_reference(
    model: &IsingModel,
    reference: &IsingModel,
    fbos: &[f64],
    noise: &NoiseModel,
) -> Result<IsingModel> {
    let n = model.num_spins();
    for len in [fbos.len(), noise.num_qubits(), reference.num_spins()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let mut fields: Vec<f64> = (0..n)
        .map(|i| model.fields()[i] + noise.qubit_offset[i] - noise.fbo_scale * fbos[i])
        .collect();
    if noise.crosstalk_kappa != 0.0 {
        for ((i, j), v) in reference.couplings() {
            fields[i] += noise.crosstalk_kappa * v;
            fields[j] += noise.crosstalk_kappa * v;
        }
    }
    let values = model
        .couplings()
        .map(|((i, j), v)| v * (1.0 + noise.gain(i, j)))
        .collect();
    model.with_values(fields, values)
}

/// Compressed adjacency used by the sweep loop.
struct Sweeper {
    fields: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    couplings: Vec<f64>,
}

impl Sweeper {
    fn new(model: &IsingModel) -> Self {
        let adjacency = model.adjacency();
        let values = model.coupling_values();
        let mut offsets = Vec::with_capacity(model.num_spins() + 1);
        let mut neighbors = Vec::new();
        let mut couplings = Vec::new();
        offsets.push(0);
        for list in &adjacency {
            for &(j, k) in list {
                neighbors.push(j);
                couplings.push(values[k]);
            }
            offsets.push(neighbors.len());
        }
        Self {
            fields: model.fields().to_vec(),
            offsets,
            neighbors,
            couplings,
        }
    }

    fn anneal<R: Rng>(&self, schedule: &[f64], rng: &mut R) -> Vec<i8> {
        let n = self.fields.len();
        let mut s: Vec<i8> = (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        for &beta in schedule {
            for i in 0..n {
                let mut local = self.fields[i];
                for k in self.offsets[i]..self.offsets[i + 1] {
                    local += self.couplings[k] * f64::from(s[self.neighbors[k]]);
                }
                let delta = -2.0 * f64::from(s[i]) * local;
                if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                    s[i] = -s[i];
                }
            }
        }
        s
    }
}

/// Draws `params.reads` annealed Metropolis samples of the effective model. The noise
/// drifts once before sampling; read `r` of call `call` uses its own derived seed, so
/// output is identical for any thread count.
pub fn sample(
    model: &IsingModel,
    fbos: &[f64],
    noise: &mut NoiseModel,
    params: &SamplerParams,
    call: u64,
) -> Result<SampleSet> {
    let reference = model.clone();
    sample_with_reference(model, &reference, fbos, noise, params, call)
}

/// [`sample`] with crosstalk taken from `reference` (see
/// [`effective_model_with_reference`]).
pub fn sample_with_reference(
    model: &IsingModel,
    reference: &IsingModel,
    fbos: &[f64],
    noise: &mut NoiseModel,
    params: &SamplerParams,
    call: u64,
) -> Result<SampleSet> {
    params.validate()?;
    noise.drift();
    let effective = effective_model_with_reference(model, reference, fbos, noise)?;
    let sweeper = Sweeper::new(&effective);
    let schedule = params.schedule();
    let reads: Vec<Vec<i8>> = (0..params.reads as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::rng_for(params.seed, rng::STREAM_READS, (call << 32) | r);
            sweeper.anneal(&schedule, &mut rng)
        })
        .collect();
    Ok(SampleSet {
        num_spins: model.num_spins(),
        states: reads.into_iter().flatten().collect(),
        provenance: Some(Provenance {
            model_hash: model_hash(model),
            params: *params,
            call,
        }),
    })
}

/// Largest model [`exact_stats`] enumerates.
pub const EXACT_LIMIT: usize = 24;

/// Exact Boltzmann magnetizations `<s_i>` and frustration probabilities at inverse
/// temperature `beta`, by enumerating all `2^N` states.
pub fn exact_stats(model: &IsingModel, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = model.num_spins();
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge(n, EXACT_LIMIT));
    }
    let energy = |bits: u32| -> f64 {
        let s = |i: usize| if bits >> i & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = 0.0;
        for (i, h) in model.fields().iter().enumerate() {
            e += h * s(i);
        }
        for ((i, j), v) in model.couplings() {
            e += v * s(i) * s(j);
        }
        e
    };
    let states = 1u32 << n;
    let ground = (0..states).map(energy).fold(f64::INFINITY, f64::min);
    let mut z = 0.0;
    let mut m = vec![0.0; n];
    let mut f = vec![0.0; model.num_couplers()];
    for bits in 0..states {
        let w = (-beta * (energy(bits) - ground)).exp();
        z += w;
        for (i, mi) in m.iter_mut().enumerate() {
            if bits >> i & 1 == 1 {
                *mi -= w;
            } else {
                *mi += w;
            }
        }
        for (k, (&(i, j), &v)) in model
            .edges()
            .iter()
            .zip(model.coupling_values())
            .enumerate()
        {
            let aligned = (bits >> i & 1) == (bits >> j & 1);
            if aligned == (v > 0.0) {
                f[k] += w;
            }
        }
    }
    m.iter_mut().for_each(|x| *x /= z);
    f.iter_mut().for_each(|x| *x /= z);
    Ok((m, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{make_frustrated_loop, GaugeTransform};

    fn pair(j: f64) -> IsingModel {
        IsingModel::new(2, vec![], [((0, 1), j)]).unwrap()
    }

    #[test]
    fn effective_model_examples() {
        let m = pair(-1.0);
        let zero = NoiseModel::zero(2);
        assert_eq!(effective_model(&m, &[0.0, 0.0], &zero).unwrap(), m);

        let mut n = NoiseModel::zero(2);
        n.crosstalk_kappa = 0.01;
        let e = effective_model(&m, &[0.0, 0.0], &n).unwrap();
        assert_eq!(e.fields(), &[-0.01, -0.01]);

        let single = IsingModel::new(1, vec![0.25], []).unwrap();
        let mut n = NoiseModel::zero(1);
        n.qubit_offset[0] = 0.3;
        n.fbo_scale = 4.0;
        let e = effective_model(&single, &[0.3 / 4.0], &n).unwrap();
        assert!((e.fields()[0] - 0.25).abs() < 1e-15);

        let mut n = NoiseModel::zero(2);
        n.coupler_gain.insert((0, 1), 0.1);
        let e = effective_model(&m, &[0.0, 0.0], &n).unwrap();
        assert!((e.coupling(0, 1).unwrap() + 1.1).abs() < 1e-15);
        assert!(effective_model(&m, &[0.0], &n).is_err());
    }

    #[test]
    fn schedule_is_geometric() {
        let p = SamplerParams {
            sweeps: 3,
            beta_initial: 0.5,
            beta_final: 2.0,
            ..SamplerParams::default()
        };
        let s = p.schedule();
        assert!(
            (s[0] - 0.5).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-12 && (s[2] - 2.0).abs() < 1e-12
        );
        assert!(SamplerParams {
            beta_initial: 3.0,
            beta_final: 1.0,
            ..p
        }
        .validate()
        .is_err());
        assert!(SamplerParams { reads: 0, ..p }.validate().is_err());
    }

    #[test]
    fn strong_ferromagnet_aligns() {
        let m = pair(-2.0);
        let p = SamplerParams {
            reads: 100,
            sweeps: 200,
            beta_initial: 0.1,
            beta_final: 10.0,
            seed: 4,
        };
        let s = sample(&m, &[0.0, 0.0], &mut NoiseModel::zero(2), &p, 0).unwrap();
        let aligned = s.reads().filter(|r| r[0] == r[1]).count();
        assert!(aligned >= 99, "{aligned}");
    }

    #[test]
    fn free_spin_is_unbiased() {
        let m = IsingModel::new(1, vec![], []).unwrap();
        let p = SamplerParams {
            reads: 10_000,
            sweeps: 5,
            seed: 8,
            ..SamplerParams::default()
        };
        let s = sample(&m, &[0.0], &mut NoiseModel::zero(1), &p, 0).unwrap();
        let mean = s.reads().map(|r| f64::from(r[0])).sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 3.0 / 100.0, "{mean}");
    }

    #[test]
    fn single_spin_with_offset_matches_gibbs_mean() {
        let m = IsingModel::new(1, vec![], []).unwrap();
        let mut noise = NoiseModel::zero(1);
        noise.qubit_offset[0] = 0.3;
        let beta = 1.5;
        let p = SamplerParams {
            reads: 10_000,
            sweeps: 20,
            beta_initial: beta,
            beta_final: beta,
            seed: 2,
        };
        let s = sample(&m, &[0.0], &mut noise, &p, 0).unwrap();
        let mean = s.reads().map(|r| f64::from(r[0])).sum::<f64>() / 10_000.0;
        let expected = -(beta * 0.3f64).tanh();
        let sigma = ((1.0 - expected * expected) / 10_000.0).sqrt();
        assert!(
            (mean - expected).abs() < 3.0 * sigma,
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = make_frustrated_loop(8, -1.0).unwrap();
        let p = SamplerParams {
            reads: 20,
            sweeps: 50,
            seed: 77,
            ..SamplerParams::default()
        };
        let fb = vec![0.0; 8];
        let a = sample(&m, &fb, &mut NoiseModel::zero(8), &p, 3).unwrap();
        let b = sample(&m, &fb, &mut NoiseModel::zero(8), &p, 3).unwrap();
        let c = sample(&m, &fb, &mut NoiseModel::zero(8), &p, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.num_reads(), 20);
    }

    #[test]
    fn exact_stats_examples() {
        let (m, f) = exact_stats(&pair(-1.0), 0.0).unwrap();
        assert_eq!(m, vec![0.0, 0.0]);
        assert_eq!(f, vec![0.5]);
        let beta = 1.3;
        let (m, f) = exact_stats(&pair(-1.0), beta).unwrap();
        assert!(m.iter().all(|x| x.abs() < 1e-15));
        let expected = 1.0 / (1.0 + (2.0 * beta).exp());
        assert!((f[0] - expected).abs() < 1e-15);
        let (_, f) = exact_stats(&pair(-1.0), 40.0).unwrap();
        assert!(f[0] < 1e-30);

        let lp = make_frustrated_loop(7, -1.0).unwrap();
        let (_, f) = exact_stats(&lp, 0.8).unwrap();
        assert!(f.iter().all(|x| (x - f[0]).abs() < 1e-12));

        let big = IsingModel::new(25, vec![], []).unwrap();
        assert!(matches!(
            exact_stats(&big, 1.0),
            Err(Error::TooLarge(25, 24))
        ));
    }

    #[test]
    fn exact_stats_are_gauge_covariant() {
        let m = IsingModel::new(3, vec![0.2, -0.1, 0.0], [((0, 1), -1.0), ((1, 2), 0.5)]).unwrap();
        let g = GaugeTransform::new([1]);
        let (m0, f0) = exact_stats(&m, 1.0).unwrap();
        let (m1, f1) = exact_stats(&m.apply_gauge(&g), 1.0).unwrap();
        assert!((m0[1] + m1[1]).abs() < 1e-12 && (m0[0] - m1[0]).abs() < 1e-12);
        assert!(f0.iter().zip(&f1).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
