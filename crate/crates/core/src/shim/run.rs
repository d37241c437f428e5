use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    adapt_step_size, coupler_step, damp_step, fbo_step, field_step, ShimConfig, ShimKind,
    ShimState, Stage,
};
use crate::error::{Error, Result};
use crate::hardware::EmbeddingSet;
use crate::ising::IsingModel;
use crate::orbits::{ising_orbits, override_orbits, OrbitClasses, Orbits};
use crate::sampler::{sample_with_reference, NoiseModel, SamplerParams};
use crate::stats::{
    decode_chains, frustrations, magnetizations, order_parameter, IterationRecord,
    ObservableSeries, SublatticeColoring,
};

/// Chain groups (source spins) decoded to logical spins, with their sublattice colors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiSpec {
    pub groups: Vec<Vec<usize>>,
    pub coloring: SublatticeColoring,
}

/// A source model, its disjoint embeddings and the orbits that define shim targets.
///
/// All shim terms live on the compact model: the disjoint union of one copy per
/// embedding, spin `k n + s` and coupler `k |E| + c` for copy `k`.
#[derive(Debug, Clone)]
pub struct Experiment {
    nominal: IsingModel,
    embeddings: EmbeddingSet,
    source_orbits: Orbits,
    compact: IsingModel,
    orbits: Orbits,
    psi: Option<PsiSpec>,
}

impl Experiment {
    /// `nominal` must share the embedded source's coupler graph; `source_orbits` must
    /// describe `nominal`.
    pub fn new(
        nominal: IsingModel,
        embeddings: EmbeddingSet,
        source_orbits: Orbits,
    ) -> Result<Self> {
        if embeddings.is_empty() {
            return Err(Error::InconsistentEmbedding("no embeddings".into()));
        }
        source_orbits.check_against(&nominal)?;
        let compact = embeddings.copies_model(&nominal)?;
        let orbits = source_orbits.tile_copies(embeddings.len());
        Ok(Self {
            nominal,
            embeddings,
            source_orbits,
            compact,
            orbits,
            psi: None,
        })
    }

    /// Orbits computed from `nominal` (finite) or declared by coupling value (infinite).
    pub fn with_kind(
        nominal: IsingModel,
        embeddings: EmbeddingSet,
        kind: ShimKind,
        budget: u64,
    ) -> Result<Self> {
        let orbits = match kind {
            ShimKind::EmbeddedFinite => ising_orbits(&nominal, budget)?,
            ShimKind::TriangularInfinite => {
                override_orbits(&nominal, &OrbitClasses::by_coupling_value(&nominal))?
            }
        };
        Self::new(nominal, embeddings, orbits)
    }

    /// Records the order parameter of every decoded read.
    pub fn with_psi(mut self, psi: PsiSpec) -> Result<Self> {
        if psi.groups.len() != psi.coloring.color.len() {
            return Err(Error::LengthMismatch {
                expected: psi.groups.len(),
                got: psi.coloring.color.len(),
            });
        }
        let n = self.nominal.num_spins();
        if let Some(&s) = psi.groups.iter().flatten().find(|&&s| s >= n) {
            return Err(Error::SpinOutOfRange {
                index: s,
                num_spins: n,
            });
        }
        self.psi = Some(psi);
        Ok(self)
    }

    pub fn nominal(&self) -> &IsingModel {
        &self.nominal
    }

    pub fn embeddings(&self) -> &EmbeddingSet {
        &self.embeddings
    }

    pub fn source_orbits(&self) -> &Orbits {
        &self.source_orbits
    }

    /// The disjoint union of all copies at nominal values.
    pub fn compact_model(&self) -> &IsingModel {
        &self.compact
    }

    /// Orbits of the compact model.
    pub fn orbits(&self) -> &Orbits {
        &self.orbits
    }

    pub fn psi(&self) -> Option<&PsiSpec> {
        self.psi.as_ref()
    }

    pub fn num_copies(&self) -> usize {
        self.embeddings.len()
    }

    /// Hardware-indexed noise seen by the compact model.
    pub fn compact_noise(&self, hardware: &NoiseModel) -> Result<NoiseModel> {
        let qubits = self.embeddings.flat_qubits();
        if let Some(&q) = qubits.iter().find(|&&q| q >= hardware.num_qubits()) {
            return Err(Error::SpinOutOfRange {
                index: q,
                num_spins: hardware.num_qubits(),
            });
        }
        Ok(hardware.relabel(&qubits, self.compact.edges()))
    }

    fn psi_groups(&self) -> Option<Vec<Vec<usize>>> {
        let psi = self.psi.as_ref()?;
        let n = self.nominal.num_spins();
        Some(
            (0..self.num_copies())
                .flat_map(|k| {
                    psi.groups
                        .iter()
                        .map(move |g| g.iter().map(|&s| k * n + s).collect())
                })
                .collect(),
        )
    }
}

/// History, final state and order-parameter samples of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub series: ObservableSeries,
    pub state: ShimState,
    /// `(iteration, ψ of every decoded read)`; reads are ordered copy-major.
    pub psi: Vec<(u64, Vec<Complex64>)>,
}

/// Runs `iterations` rounds of: program the compact model, sample, measure, then apply
/// the active shims in the order flux offset, coupler, field, damping, and finally
/// adapt step sizes. Every record holds the terms that produced its samples.
///
/// `noise` is indexed like the compact model (see [`Experiment::compact_noise`]);
/// `initial` warm-starts from a saved state. Runs are deterministic for fixed seeds.
pub fn run_loop(
    experiment: &Experiment,
    noise: &mut NoiseModel,
    config: &ShimConfig,
    initial: Option<ShimState>,
    iterations: u64,
    sampler: &SamplerParams,
) -> Result<RunOutput> {
    config.validate()?;
    sampler.validate()?;
    noise.validate()?;
    let compact = experiment.compact_model();
    let orbits = experiment.orbits();
    if noise.num_qubits() != compact.num_spins() {
        return Err(Error::LengthMismatch {
            expected: compact.num_spins(),
            got: noise.num_qubits(),
        });
    }
    let mut state = initial.unwrap_or_else(|| ShimState::nominal(compact, config));
    state.check(compact)?;
    let groups = experiment.psi_groups();
    let mut series = ObservableSeries::new();
    let mut psi = Vec::new();
    let stages = &config.stages;
    let adaptive = &config.adaptive;

    for _ in 0..iterations {
        let t = state.iteration;
        let programmed = state.programmed(compact)?;
        let samples = sample_with_reference(&programmed, compact, &state.fbo, noise, sampler, t)?;
        let m = magnetizations(&samples);
        let f = frustrations(&samples, &programmed)?;
        if let (Some(groups), Some(spec)) = (&groups, experiment.psi()) {
            psi.push((t, copy_major_psi(&samples, groups, &spec.coloring)?));
        }
        series.push(IterationRecord {
            iter: t,
            m: m.clone(),
            f: f.clone(),
            fbo: state.fbo.clone(),
            couplings: state.couplings.clone(),
            fields: state.fields.clone(),
        })?;

        if stages.active(Stage::Fbo, t) {
            fbo_step(&mut state, &m, orbits)?;
        }
        if stages.active(Stage::Coupler, t) {
            coupler_step(&mut state, &f, orbits, compact, config)?;
        }
        if stages.active(Stage::Field, t) {
            field_step(&mut state, &m, orbits, compact)?;
        }
        if stages.active(Stage::Damping, t) {
            damp_step(&mut state, config.damping_rho, compact.coupling_values())?;
        }
        if adaptive.enabled && t.is_multiple_of(adaptive.every) {
            let depth = adaptive.lookback + 1;
            if stages.active(Stage::Fbo, t) {
                let h = series.recent(depth, |r| &r.fbo);
                state.alpha_phi = adapt_step_size(state.alpha_phi, &h, adaptive).0;
            }
            if stages.active(Stage::Coupler, t) {
                let h = series.recent(depth, |r| &r.couplings);
                state.alpha_j = adapt_step_size(state.alpha_j, &h, adaptive).0;
            }
            if stages.active(Stage::Field, t) {
                let h = series.recent(depth, |r| &r.fields);
                state.alpha_h = adapt_step_size(state.alpha_h, &h, adaptive).0;
            }
        }
        state.iteration += 1;
    }
    Ok(RunOutput { series, state, psi })
}

fn copy_major_psi(
    samples: &crate::sampler::SampleSet,
    groups: &[Vec<usize>],
    coloring: &SublatticeColoring,
) -> Result<Vec<Complex64>> {
    let per_copy = coloring.color.len();
    let decoded = decode_chains(samples, groups)?;
    let copies = groups.len() / per_copy;
    let states: Vec<Vec<i8>> = (0..copies)
        .flat_map(|k| {
            decoded
                .iter()
                .map(move |read| read[k * per_copy..(k + 1) * per_copy].to_vec())
        })
        .collect();
    Ok(order_parameter(&states, coloring)?.0)
}

/// Writes `iter,kind,id,value` rows: `m` per qubit, `f` per coupler, `phi`, `J` and `h`
/// per term, and `sigma_m`, `sigma_f` (id 0) once `window` records exist.
pub fn write_series_csv<W: Write>(
    series: &ObservableSeries,
    orbits: &Orbits,
    window: usize,
    out: &mut W,
) -> io::Result<()> {
    writeln!(out, "iter,kind,id,value")?;
    for (t, r) in series.records().iter().enumerate() {
        for (kind, values) in [
            ("m", &r.m),
            ("f", &r.f),
            ("phi", &r.fbo),
            ("J", &r.couplings),
            ("h", &r.fields),
        ] {
            for (id, v) in values.iter().enumerate() {
                writeln!(out, "{},{kind},{id},{v}", r.iter)?;
            }
        }
        if window > 0 && t + 1 >= window {
            let (sm, sf) = series
                .dispersion_at(t, window, orbits)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            writeln!(out, "{},sigma_m,0,{sm}", r.iter)?;
            writeln!(out, "{},sigma_f,0,{sf}", r.iter)?;
        }
    }
    Ok(())
}

/// Writes `iter,read,re,im` rows.
pub fn write_psi_csv<W: Write>(psi: &[(u64, Vec<Complex64>)], out: &mut W) -> io::Result<()> {
    writeln!(out, "iter,read,re,im")?;
    for (t, values) in psi {
        for (r, z) in values.iter().enumerate() {
            writeln!(out, "{t},{r},{},{}", z.re, z.im)?;
        }
    }
    Ok(())
}

/// Shared flux offsets and the magnetizations measured at every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOutput {
    pub fbo: Vec<f64>,
    /// `magnetizations[step]`, step `c · R + r` sampling realization `r` in cycle `c`.
    pub magnetizations: Vec<Vec<f64>>,
}

/// Flux-offset shim over many zero-field realizations on the same qubits, visited
/// round-robin for `cycles` cycles. Every qubit targets `m = 0`; couplers are not
/// shimmed. `alpha_phi = 0` measures the unshimmed baseline.
pub fn ensemble_fbo_shim(
    realizations: &[IsingModel],
    noise: &mut NoiseModel,
    alpha_phi: f64,
    cycles: usize,
    sampler: &SamplerParams,
) -> Result<EnsembleOutput> {
    let Some(first) = realizations.first() else {
        return Err(Error::InvalidParameter("no realizations".into()));
    };
    let n = first.num_spins();
    for (r, model) in realizations.iter().enumerate() {
        if model.num_spins() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: model.num_spins(),
            });
        }
        if model.fields().iter().any(|&h| h != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "realization {r} has a nonzero field"
            )));
        }
    }
    if noise.num_qubits() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: noise.num_qubits(),
        });
    }
    if !(alpha_phi >= 0.0 && alpha_phi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha_phi {alpha_phi} must be nonnegative"
        )));
    }
    let singletons: Vec<Orbits> = realizations
        .iter()
        .map(|model| {
            override_orbits(
                model,
                &OrbitClasses {
                    qubit_classes: (0..n).map(|q| vec![q]).collect(),
                    coupler_classes: model.edges().iter().map(|&e| vec![e]).collect(),
                    qubit_opposites: (0..n).map(|q| (q, q)).collect(),
                    coupler_opposites: vec![],
                },
            )
        })
        .collect::<Result<_>>()?;
    let mut state = ShimState {
        alpha_phi,
        ..ShimState::nominal(first, &ShimConfig::default())
    };
    let mut history = Vec::with_capacity(cycles * realizations.len());
    let mut call = 0u64;
    for _ in 0..cycles {
        for (model, orbits) in realizations.iter().zip(&singletons) {
            let samples = sample_with_reference(model, model, &state.fbo, noise, sampler, call)?;
            let m = magnetizations(&samples);
            fbo_step(&mut state, &m, orbits)?;
            history.push(m);
            call += 1;
        }
    }
    Ok(EnsembleOutput {
        fbo: state.fbo,
        magnetizations: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardware::{make_chimera, raster_embed, RasterOptions};
    use crate::ising::make_fm_loop;
    use crate::orbits::DEFAULT_BUDGET;
    use crate::sampler::NoiseParams;
    use crate::shim::StageSchedule;

    fn small_experiment() -> (Experiment, NoiseModel) {
        let hw = make_chimera(2, 2, 4).unwrap();
        let lp = make_fm_loop(8, -1.0).unwrap();
        let es = raster_embed(
            &lp,
            &hw,
            RasterOptions {
                max_copies: 2,
                ..RasterOptions::default()
            },
        )
        .unwrap();
        assert_eq!(es.len(), 2);
        let exp = Experiment::with_kind(lp, es, ShimKind::EmbeddedFinite, DEFAULT_BUDGET).unwrap();
        let hw_noise = NoiseModel::generate(
            hw.num_qubits(),
            &hw.graph().edges(),
            &NoiseParams::default(),
            3,
        )
        .unwrap();
        let noise = exp.compact_noise(&hw_noise).unwrap();
        (exp, noise)
    }

    fn fast() -> SamplerParams {
        SamplerParams {
            reads: 20,
            sweeps: 50,
            ..SamplerParams::default()
        }
    }

    #[test]
    fn disabled_stages_leave_terms_constant() {
        let (exp, mut noise) = small_experiment();
        let out = run_loop(&exp, &mut noise, &ShimConfig::default(), None, 5, &fast()).unwrap();
        assert_eq!(out.series.len(), 5);
        let first = &out.series.records()[0];
        for r in out.series.records() {
            assert_eq!(r.fbo, first.fbo);
            assert_eq!(r.couplings, first.couplings);
        }
        assert_eq!(out.state.iteration, 5);
    }

    #[test]
    fn zero_iterations_echo_nominal_state() {
        let (exp, mut noise) = small_experiment();
        let cfg = ShimConfig::default();
        let out = run_loop(&exp, &mut noise, &cfg, None, 0, &fast()).unwrap();
        assert!(out.series.is_empty());
        assert_eq!(out.state, ShimState::nominal(exp.compact_model(), &cfg));
    }

    #[test]
    fn runs_are_deterministic_and_staged() {
        let (exp, noise) = small_experiment();
        let cfg = ShimConfig {
            stages: StageSchedule {
                fbo: Some(2),
                coupler: Some(4),
                ..Default::default()
            },
            alpha_phi: 1e-3,
            ..ShimConfig::default()
        };
        let run = || {
            let mut n = noise.clone();
            run_loop(&exp, &mut n, &cfg, None, 6, &fast()).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        let recs = a.series.records();
        assert_eq!(recs[2].fbo, recs[0].fbo);
        assert_ne!(recs[3].fbo, recs[2].fbo);
        assert_eq!(recs[4].couplings, recs[0].couplings);
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_series_csv(&a.series, exp.orbits(), 3, &mut csv_a).unwrap();
        write_series_csv(&b.series, exp.orbits(), 3, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
        let text = String::from_utf8(csv_a).unwrap();
        assert!(text.starts_with("iter,kind,id,value\n0,m,0,"));
        assert!(text.contains("\n2,sigma_m,0,"));
        assert!(!text.contains("\n1,sigma_m,0,"));
    }

    #[test]
    fn warm_start_continues() {
        let (exp, noise) = small_experiment();
        let cfg = ShimConfig {
            stages: StageSchedule {
                fbo: Some(0),
                ..Default::default()
            },
            alpha_phi: 1e-3,
            ..ShimConfig::default()
        };
        let mut n1 = noise.clone();
        let whole = run_loop(&exp, &mut n1, &cfg, None, 4, &fast()).unwrap();
        let mut n2 = noise.clone();
        let half = run_loop(&exp, &mut n2, &cfg, None, 2, &fast()).unwrap();
        let json = serde_json::to_string(&half.state).unwrap();
        let state: ShimState = serde_json::from_str(&json).unwrap();
        let rest = run_loop(&exp, &mut n2, &cfg, Some(state), 2, &fast()).unwrap();
        assert_eq!(rest.state, whole.state);
    }

    #[test]
    fn ensemble_rejects_fields_and_runs() {
        let lp = make_fm_loop(4, -1.0).unwrap();
        let mut noise = NoiseModel::zero(4);
        let with_field = IsingModel::new(4, vec![0.1, 0.0, 0.0, 0.0], []).unwrap();
        assert!(
            ensemble_fbo_shim(&[lp.clone(), with_field], &mut noise, 1e-3, 1, &fast()).is_err()
        );
        let out = ensemble_fbo_shim(&[lp.clone(), lp], &mut noise, 1e-3, 2, &fast()).unwrap();
        assert_eq!(out.magnetizations.len(), 4);
        assert_eq!(out.fbo.len(), 4);
    }
}
