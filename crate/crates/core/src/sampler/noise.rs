use std::collections::BTreeMap;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{Coupler, GaugeTransform};
use crate::rng;

/// Systematic distortions of the simulated annealer, indexed by qubit and coupler.
///
/// Programmed terms become `h_eff = h + offset + κ Σ_j J_ij - γ Φ` and
/// `J_eff = J (1 + gain)`; see [`super::effective_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub qubit_offset: Vec<f64>,
    #[serde(with = "gain_list")]
    pub coupler_gain: BTreeMap<Coupler, f64>,
    pub crosstalk_kappa: f64,
    pub fbo_scale: f64,
    pub drift_sigma: f64,
    pub seed: u64,
    /// Number of drift steps taken so far.
    #[serde(default)]
    pub drift_steps: u64,
}

/// Magnitudes used by [`NoiseModel::generate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    pub offset_sigma: f64,
    pub gain_sigma: f64,
    pub crosstalk_kappa: f64,
    pub fbo_scale: f64,
    pub drift_sigma: f64,
}

/// Flux-bias units per effective-field unit assumed by default. With this scale a
/// flux step of `1e-5` moves a field by `0.05`.
pub const DEFAULT_FBO_SCALE: f64 = 5000.0;

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            offset_sigma: 0.02,
            gain_sigma: 0.02,
            crosstalk_kappa: 0.005,
            fbo_scale: DEFAULT_FBO_SCALE,
            drift_sigma: 0.0,
        }
    }
}

mod gain_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::ising::Coupler;

    pub fn serialize<S: Serializer>(map: &BTreeMap<Coupler, f64>, s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<(usize, usize, f64)> = map.iter().map(|(&(i, j), &g)| (i, j, g)).collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<Coupler, f64>, D::Error> {
        let list = Vec::<(usize, usize, f64)>::deserialize(d)?;
        Ok(list
            .into_iter()
            .map(|(i, j, g)| ((i.min(j), i.max(j)), g))
            .collect())
    }
}

impl NoiseModel {
    /// No distortion at all (unit flux scale).
    pub fn zero(num_qubits: usize) -> Self {
        Self {
            qubit_offset: vec![0.0; num_qubits],
            coupler_gain: BTreeMap::new(),
            crosstalk_kappa: 0.0,
            fbo_scale: 1.0,
            drift_sigma: 0.0,
            seed: 0,
            drift_steps: 0,
        }
    }

    /// Draws offsets and gains from zero-mean normals. Gains are truncated to
    /// `(-0.9, 0.9)` so couplers never change sign.
    pub fn generate(
        num_qubits: usize,
        couplers: &[Coupler],
        params: &NoiseParams,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = rng::rng_for(seed, rng::STREAM_NOISE, 0);
        let offsets = normal(params.offset_sigma)?;
        let gains = normal(params.gain_sigma)?;
        let qubit_offset = (0..num_qubits).map(|_| offsets.sample(&mut rng)).collect();
        let coupler_gain = couplers
            .iter()
            .map(|&(i, j)| {
                (
                    (i.min(j), i.max(j)),
                    gains.sample(&mut rng).clamp(-0.9, 0.9),
                )
            })
            .collect();
        let noise = Self {
            qubit_offset,
            coupler_gain,
            crosstalk_kappa: params.crosstalk_kappa,
            fbo_scale: params.fbo_scale,
            drift_sigma: params.drift_sigma,
            seed,
            drift_steps: 0,
        };
        noise.validate()?;
        Ok(noise)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.fbo_scale > 0.0 && self.fbo_scale.is_finite()) {
            return bad(format!(
                "fbo_scale must be positive, got {}",
                self.fbo_scale
            ));
        }
        if !(self.drift_sigma >= 0.0 && self.drift_sigma.is_finite()) {
            return bad(format!(
                "drift_sigma must be nonnegative, got {}",
                self.drift_sigma
            ));
        }
        if !self.crosstalk_kappa.is_finite() || self.qubit_offset.iter().any(|o| !o.is_finite()) {
            return bad("non-finite crosstalk or offset".into());
        }
        if let Some((c, g)) = self
            .coupler_gain
            .iter()
            .find(|(_, g)| g.is_nan() || g.abs() >= 1.0)
        {
            return bad(format!("gain {g} on coupler {c:?} must satisfy |gain| < 1"));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_offset.len()
    }

    pub fn offset(&self, q: usize) -> f64 {
        self.qubit_offset.get(q).copied().unwrap_or(0.0)
    }

    /// Gain of coupler `(i, j)` in either orientation; absent couplers have gain 0.
    pub fn gain(&self, i: usize, j: usize) -> f64 {
        self.coupler_gain
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    /// The noise seen by a model whose spin `p` sits on qubit `qubits[p]`; couplers
    /// `(a, b)` of that model take the gain of `(qubits[a], qubits[b])`.
    pub fn relabel(&self, qubits: &[usize], couplers: &[Coupler]) -> Self {
        Self {
            qubit_offset: qubits.iter().map(|&q| self.offset(q)).collect(),
            coupler_gain: couplers
                .iter()
                .map(|&(a, b)| ((a, b), self.gain(qubits[a], qubits[b])))
                .filter(|&(_, g)| g != 0.0)
                .collect(),
            ..self.clone()
        }
    }

    /// The same physical distortion seen through a gauge: offsets flip on flipped spins.
    pub fn apply_gauge(&self, g: &GaugeTransform) -> Self {
        let mut out = self.clone();
        for &q in g.flip_set() {
            if let Some(o) = out.qubit_offset.get_mut(q) {
                *o = -*o;
            }
        }
        out
    }

    /// One random-walk step of every qubit offset (no-op when `drift_sigma == 0`).
    pub fn drift(&mut self) {
        if self.drift_sigma == 0.0 {
            return;
        }
        let step = Normal::new(0.0, self.drift_sigma).expect("validated sigma");
        let mut rng = rng::rng_for(self.seed, rng::STREAM_DRIFT, self.drift_steps);
        for o in &mut self.qubit_offset {
            *o += step.sample(&mut rng);
        }
        self.drift_steps += 1;
    }
}

fn normal(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma)
        .map_err(|_| Error::InvalidParameter(format!("invalid standard deviation {sigma}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_seeded_and_valid() {
        let couplers = [(0, 1), (1, 2)];
        let a = NoiseModel::generate(3, &couplers, &NoiseParams::default(), 9).unwrap();
        let b = NoiseModel::generate(3, &couplers, &NoiseParams::default(), 9).unwrap();
        let c = NoiseModel::generate(3, &couplers, &NoiseParams::default(), 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.coupler_gain.len(), 2);
        assert!(a.qubit_offset.iter().all(|o| o.abs() < 0.2));
    }

    #[test]
    fn json_roundtrip() {
        let a = NoiseModel::generate(4, &[(0, 3), (1, 2)], &NoiseParams::default(), 1).unwrap();
        let text = serde_json::to_string(&a).unwrap();
        assert!(text.contains("\"coupler_gain\":[[0,3,"));
        assert_eq!(serde_json::from_str::<NoiseModel>(&text).unwrap(), a);
    }

    #[test]
    fn validation() {
        let mut n = NoiseModel::zero(2);
        assert!(n.validate().is_ok());
        n.fbo_scale = 0.0;
        assert!(n.validate().is_err());
        let mut n = NoiseModel::zero(2);
        n.coupler_gain.insert((0, 1), 1.0);
        assert!(n.validate().is_err());
    }

    #[test]
    fn drift_walks_reproducibly() {
        let mut a = NoiseModel::zero(5);
        a.drift_sigma = 0.1;
        let mut b = a.clone();
        a.drift();
        b.drift();
        assert_eq!(a, b);
        assert!(a.qubit_offset.iter().any(|&o| o != 0.0));
        let mut still = NoiseModel::zero(5);
        still.drift();
        assert_eq!(still.drift_steps, 0);
    }

    #[test]
    fn relabel_and_gauge() {
        let mut n = NoiseModel::zero(10);
        n.qubit_offset[7] = 0.3;
        n.coupler_gain.insert((3, 7), 0.1);
        let r = n.relabel(&[7, 3], &[(0, 1)]);
        assert_eq!(r.qubit_offset, vec![0.3, 0.0]);
        assert_eq!(r.gain(0, 1), 0.1);
        let g = n.apply_gauge(&GaugeTransform::new([7]));
        assert_eq!(g.qubit_offset[7], -0.3);
        assert_eq!(g.gain(3, 7), 0.1);
    }
}
