//! Feedback loops that adjust flux offsets, couplings and fields until the sampled
//! statistics are uniform across symmetry orbits.

mod run;

pub use run::{
    ensemble_fbo_shim, run_loop, write_psi_csv, write_series_csv, EnsembleOutput, Experiment,
    PsiSpec, RunOutput,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::orbits::Orbits;
use crate::stats::{coupler_targets, fit_walk_exponent, qubit_targets};

/// Live shim terms of a compact experiment (all copies, copy-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimState {
    pub fbo: Vec<f64>,
    pub couplings: Vec<f64>,
    pub fields: Vec<f64>,
    pub alpha_phi: f64,
    pub alpha_j: f64,
    pub alpha_h: f64,
    pub iteration: u64,
    /// Couplers clamped to the programmable range so far.
    #[serde(default)]
    pub clamp_events: u64,
    /// Coupler multipliers raised to the configured minimum so far.
    #[serde(default)]
    pub floor_events: u64,
}

impl ShimState {
    /// Zero offsets, nominal couplings and fields, step sizes from `config`.
    pub fn nominal(model: &IsingModel, config: &ShimConfig) -> Self {
        Self {
            fbo: vec![0.0; model.num_spins()],
            couplings: model.coupling_values().to_vec(),
            fields: model.fields().to_vec(),
            alpha_phi: config.alpha_phi,
            alpha_j: config.alpha_j,
            alpha_h: config.alpha_h,
            iteration: 0,
            clamp_events: 0,
            floor_events: 0,
        }
    }

    /// Checks term lengths against `model`.
    pub fn check(&self, model: &IsingModel) -> Result<()> {
        for (len, want) in [
            (self.fbo.len(), model.num_spins()),
            (self.fields.len(), model.num_spins()),
            (self.couplings.len(), model.num_couplers()),
        ] {
            if len != want {
                return Err(Error::LengthMismatch {
                    expected: want,
                    got: len,
                });
            }
        }
        Ok(())
    }

    /// `model` with this state's couplings and fields.
    pub fn programmed(&self, model: &IsingModel) -> Result<IsingModel> {
        model.with_values(self.fields.clone(), self.couplings.clone())
    }
}

/// A shim that can be switched on by the stage schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Fbo,
    Coupler,
    Field,
    Damping,
}

/// Iteration from which each shim runs; `None` keeps it off.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageSchedule {
    pub fbo: Option<u64>,
    pub coupler: Option<u64>,
    pub field: Option<u64>,
    pub damping: Option<u64>,
}

impl StageSchedule {
    pub fn start(&self, stage: Stage) -> Option<u64> {
        match stage {
            Stage::Fbo => self.fbo,
            Stage::Coupler => self.coupler,
            Stage::Field => self.field,
            Stage::Damping => self.damping,
        }
    }

    pub fn active(&self, stage: Stage, iteration: u64) -> bool {
        self.start(stage).is_some_and(|s| iteration >= s)
    }
}

/// How orbits are chosen for an experiment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShimKind {
    /// Orbits of the programmed finite model.
    #[default]
    EmbeddedFinite,
    /// One qubit class and one coupler class per coupling value, as in an infinite lattice.
    TriangularInfinite,
}

/// Step-size adaptation from the random-walk exponent of recent shim terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptiveConfig {
    pub enabled: bool,
    pub epsilon: f64,
    pub upper: f64,
    pub lower: f64,
    pub lookback: usize,
    /// Check every this many iterations.
    pub every: u64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            epsilon: 0.1,
            upper: 1.1,
            lower: 0.9,
            lookback: 20,
            every: 1,
        }
    }
}

/// Shim settings shared by every iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShimConfig {
    pub stages: StageSchedule,
    pub alpha_phi: f64,
    pub alpha_j: f64,
    pub alpha_h: f64,
    /// Inclusive programmable coupling range.
    pub coupling_range: (f64, f64),
    /// Lower bound on a single coupler multiplier `1 + α_J (f - f̄)`.
    pub min_multiplier: f64,
    pub damping_rho: f64,
    pub adaptive: AdaptiveConfig,
    /// Moving-mean window of the dispersion series.
    pub window: usize,
}

impl Default for ShimConfig {
    fn default() -> Self {
        Self {
            stages: StageSchedule::default(),
            alpha_phi: 1e-5,
            alpha_j: 1e-3,
            alpha_h: 1e-3,
            coupling_range: (-2.0, 1.0),
            min_multiplier: 0.5,
            damping_rho: 0.0,
            adaptive: AdaptiveConfig::default(),
            window: 10,
        }
    }
}

impl ShimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let (lo, hi) = self.coupling_range;
        if !(lo < 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
            return bad(format!("coupling range ({lo}, {hi}) must straddle zero"));
        }
        if !(0.0..=1.0).contains(&self.damping_rho) {
            return bad(format!(
                "damping rho {} must lie in [0, 1]",
                self.damping_rho
            ));
        }
        if !(self.min_multiplier > 0.0 && self.min_multiplier <= 1.0) {
            return bad(format!(
                "min_multiplier {} must lie in (0, 1]",
                self.min_multiplier
            ));
        }
        for (name, a) in [
            ("alpha_phi", self.alpha_phi),
            ("alpha_j", self.alpha_j),
            ("alpha_h", self.alpha_h),
        ] {
            if !(a >= 0.0 && a.is_finite()) {
                return bad(format!("{name} must be a nonnegative number, got {a}"));
            }
        }
        let ad = &self.adaptive;
        if !(ad.lower <= ad.upper && ad.epsilon >= 0.0 && ad.lookback >= 1 && ad.every >= 1) {
            return bad("adaptive thresholds must be ordered and lookback, every positive".into());
        }
        if self.window == 0 {
            return bad("window must be positive".into());
        }
        Ok(())
    }
}

/// `Φ_i ← Φ_i − α_Φ (m_i − m̄_i)` for every qubit.
pub fn fbo_step(state: &mut ShimState, m: &[f64], orbits: &Orbits) -> Result<()> {
    let targets = qubit_targets(m, orbits)?;
    for (q, phi) in state.fbo.iter_mut().enumerate() {
        let target = targets[&orbits.qubit_orbit()[q]];
        *phi -= state.alpha_phi * (m[q] - target);
    }
    Ok(())
}

/// `J ← J (1 + α_J (f − f̄))` (multiplier floored at `config.min_multiplier`), then each
/// orbit is rescaled so its mean `|J|` equals that of `reference`, then every coupler
/// is clamped to `config.coupling_range`.
pub fn coupler_step(
    state: &mut ShimState,
    f: &[f64],
    orbits: &Orbits,
    reference: &IsingModel,
    config: &ShimConfig,
) -> Result<()> {
    if state.couplings.len() != reference.num_couplers() {
        return Err(Error::LengthMismatch {
            expected: reference.num_couplers(),
            got: state.couplings.len(),
        });
    }
    let targets = coupler_targets(f, orbits)?;
    for (k, j) in state.couplings.iter_mut().enumerate() {
        let mut factor = 1.0 + state.alpha_j * (f[k] - targets[&orbits.coupler_orbit()[k]]);
        if factor < config.min_multiplier {
            factor = config.min_multiplier;
            state.floor_events += 1;
        }
        *j *= factor;
    }
    let nominal = reference.coupling_values();
    for (o, members) in orbits.coupler_members() {
        let abs_sum = |v: &[f64]| members.iter().map(|&k| v[k].abs()).sum::<f64>();
        let (now, want) = (abs_sum(&state.couplings), abs_sum(nominal));
        if now == 0.0 || want == 0.0 {
            return Err(Error::ZeroOrbitMean(o));
        }
        let scale = want / now;
        for &k in &members {
            state.couplings[k] *= scale;
        }
    }
    let (lo, hi) = config.coupling_range;
    for j in &mut state.couplings {
        let clamped = j.clamp(lo, hi);
        if clamped != *j {
            *j = clamped;
            state.clamp_events += 1;
        }
    }
    Ok(())
}

/// `h_i ← h_i + α_h (m_i − m̄_i)`, then every qubit orbit is shifted so its mean field
/// equals the mean of `reference`'s fields over that orbit (`h̄` for a uniform field).
/// Zero-field models are shimmed with flux offsets instead and are rejected.
pub fn field_step(
    state: &mut ShimState,
    m: &[f64],
    orbits: &Orbits,
    reference: &IsingModel,
) -> Result<()> {
    if reference.fields().iter().all(|&h| h == 0.0) {
        return Err(Error::InvalidParameter(
            "field shim needs a nonzero field; use the flux-offset shim".into(),
        ));
    }
    if state.fields.len() != reference.num_spins() {
        return Err(Error::LengthMismatch {
            expected: reference.num_spins(),
            got: state.fields.len(),
        });
    }
    let targets = qubit_targets(m, orbits)?;
    for (q, h) in state.fields.iter_mut().enumerate() {
        *h += state.alpha_h * (m[q] - targets[&orbits.qubit_orbit()[q]]);
    }
    for members in orbits.qubit_members().values() {
        let len = members.len() as f64;
        let want = members.iter().map(|&q| reference.fields()[q]).sum::<f64>() / len;
        let now = members.iter().map(|&q| state.fields[q]).sum::<f64>() / len;
        for &q in members {
            state.fields[q] += want - now;
        }
    }
    Ok(())
}

/// Smooths per-qubit fields across a grid of field strengths:
/// `h_i ← (1 − ε) h_i + ε (h_i⁻ + h_i⁺) / 2` at interior grid points.
pub fn smooth_fields(grid: &[Vec<f64>], eps: f64) -> Result<Vec<Vec<f64>>> {
    if grid.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least three grid points, got {}",
            grid.len()
        )));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "eps {eps} must lie in [0, 1)"
        )));
    }
    let n = grid[0].len();
    if let Some(row) = grid.iter().find(|r| r.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            got: row.len(),
        });
    }
    let mut out = grid.to_vec();
    for g in 1..grid.len() - 1 {
        for i in 0..n {
            let neighbors = (grid[g - 1][i] + grid[g + 1][i]) / 2.0;
            out[g][i] = (1.0 - eps) * grid[g][i] + eps * neighbors;
        }
    }
    Ok(out)
}

/// `J ← J − ρ (J − Ĵ)`.
pub fn damp_step(state: &mut ShimState, rho: f64, nominal: &[f64]) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "rho {rho} must lie in [0, 1]"
        )));
    }
    if nominal.len() != state.couplings.len() {
        return Err(Error::LengthMismatch {
            expected: state.couplings.len(),
            got: nominal.len(),
        });
    }
    if rho == 1.0 {
        state.couplings.copy_from_slice(nominal);
        return Ok(());
    }
    for (j, &n) in state.couplings.iter_mut().zip(nominal) {
        *j -= rho * (*j - n);
    }
    Ok(())
}

/// Applies the exponent rule to one step size: `b > upper` multiplies `alpha` by
/// `1 + ε`, `b < lower` divides by it. Returns the new step size and the exponent
/// (`None` when the history is too short or the exponent is undefined).
pub fn adapt_step_size(
    alpha: f64,
    history: &[&[f64]],
    config: &AdaptiveConfig,
) -> (f64, Option<f64>) {
    match fit_walk_exponent(history, config.lookback) {
        Ok(Some(b)) => (adapt_for_exponent(alpha, b, config), Some(b)),
        _ => (alpha, None),
    }
}

/// The step-size rule for a known exponent.
pub fn adapt_for_exponent(alpha: f64, b: f64, config: &AdaptiveConfig) -> f64 {
    if b > config.upper {
        alpha * (1.0 + config.epsilon)
    } else if b < config.lower {
        alpha / (1.0 + config.epsilon)
    } else {
        alpha
    }
}
