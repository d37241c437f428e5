use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shimkit_core::shim::{write_psi_csv, write_series_csv, PsiSpec};
use shimkit_core::{
    contract_chains, dispersion, ensemble_fbo_shim, ising_orbits, make_spin_glass,
    parse_hardware_spec, raster_embed, run_loop, square_cylinder_embeddings, standalone_copies,
    three_coloring, EmbeddingSet, Experiment, HardwareGraph, IsingModel, NoiseModel, NoiseParams,
    Orbits, RasterOptions, RunOutput, DEFAULT_BUDGET,
};

use crate::config::{read_model, BuiltModel, EnsembleSpec, ExperimentConfig, ModelSpec};
use crate::error::{CliError, CliResult};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(CliError::io(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(CliError::io(path))
}

fn print(out: &mut dyn Write, text: std::fmt::Arguments) -> CliResult<()> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(CliError::io("<stdout>"))
}

/// Orbits of a model file. Prints the counts and one line per orbit, and writes the
/// orbit JSON document to `json_out` when given.
pub fn cmd_orbits(
    model_path: &Path,
    budget: u64,
    json_out: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<Orbits> {
    let model = read_model(model_path)?;
    let orbits = ising_orbits(&model, budget)?;
    print(
        out,
        format_args!(
            "qubit orbits: {}, coupler orbits: {}",
            orbits.num_qubit_orbits(),
            orbits.num_coupler_orbits()
        ),
    )?;
    print(
        out,
        format_args!("{:<8} {:>6} {:>6} {:>9}", "kind", "id", "size", "opposite"),
    )?;
    for (kind, members, opposite) in [
        ("qubit", orbits.qubit_members(), orbits.opposite_qubit_map()),
        (
            "coupler",
            orbits.coupler_members(),
            orbits.opposite_coupler_map(),
        ),
    ] {
        for (id, m) in &members {
            let opp = opposite.get(id).map_or("-".to_string(), |o| o.to_string());
            print(
                out,
                format_args!("{kind:<8} {id:>6} {:>6} {opp:>9}", m.len()),
            )?;
        }
    }
    if let Some(path) = json_out {
        write_json(path, &orbits.to_json(&model))?;
    }
    Ok(orbits)
}

/// Options of the `embed` command.
#[derive(Debug, Clone)]
pub struct EmbedOptions {
    pub pattern: String,
    pub hardware: String,
    pub block: (usize, usize),
    pub budget: u64,
    pub max_copies: usize,
    pub seed: Option<u64>,
}

/// Packs disjoint copies of a pattern onto hardware; zero copies is an
/// [`CliError::Empty`] error.
pub fn cmd_embed(
    options: &EmbedOptions,
    json_out: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<EmbeddingSet> {
    let built = ModelSpec::from_pattern(&options.pattern)?.build()?;
    let hw = parse_hardware_spec(&options.hardware)?;
    let raster = RasterOptions {
        block: options.block,
        search_budget: options.budget,
        max_copies: options.max_copies,
        seed: options.seed,
    };
    let es = match &built {
        BuiltModel::Cylinder(cyl) => {
            square_cylinder_embeddings(cyl, &hw, options.max_copies, raster)?
        }
        BuiltModel::Plain(model) => raster_embed(model, &hw, raster)?,
    };
    if es.is_empty() {
        return Err(CliError::Empty(format!(
            "no embedding of {} found on {}",
            options.pattern, options.hardware
        )));
    }
    print(
        out,
        format_args!(
            "copies: {} ({} qubits each, {} of {} qubits used)",
            es.len(),
            built.model().num_spins(),
            es.len() * built.model().num_spins(),
            hw.num_operable()
        ),
    )?;
    if let Some(path) = json_out {
        let mut file = create(path)?;
        writeln!(file, "{}", es.maps_json())
            .and_then(|_| file.flush())
            .map_err(CliError::io(path))?;
    }
    Ok(es)
}

/// Generates a hardware-indexed noise model and writes it as JSON.
pub fn cmd_noise_gen(
    hardware: &str,
    params: &NoiseParams,
    seed: u64,
    json_out: &Path,
    out: &mut dyn Write,
) -> CliResult<NoiseModel> {
    let hw = parse_hardware_spec(hardware)?;
    let noise = NoiseModel::generate(hw.num_qubits(), &hw.graph().edges(), params, seed)?;
    write_json(json_out, &noise)?;
    print(
        out,
        format_args!(
            "noise for {} qubits and {} couplers written to {}",
            noise.num_qubits(),
            noise.coupler_gain.len(),
            json_out.display()
        ),
    )?;
    Ok(noise)
}

/// Moving-mean dispersion of one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowDispersion {
    pub iter: u64,
    pub sigma_m: f64,
    pub sigma_f: f64,
}

/// Result of the shared-offset ensemble shim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub realizations: usize,
    pub cycles: usize,
    /// Mean over qubits of `|time-averaged m_i|` over the second half, unshimmed.
    pub baseline: f64,
    /// The same with the flux offset shim active.
    pub shimmed: f64,
}

/// Headline numbers of one `run`, written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub seed: u64,
    pub hardware: String,
    pub copies: usize,
    pub iterations: u64,
    pub qubit_orbits: usize,
    pub coupler_orbits: usize,
    pub first_window: Option<WindowDispersion>,
    pub last_window: Option<WindowDispersion>,
    /// Largest `|J - J_nominal| / |J_nominal|` over couplers in the final state.
    pub max_coupler_deviation: f64,
    pub clamp_events: u64,
    pub floor_events: u64,
    /// Mean `|ψ|` over reads of the final iteration, for lattice experiments.
    pub final_mean_abs_psi: Option<f64>,
    pub ensemble: Option<EnsembleSummary>,
}

/// Everything a run produced, before it is written out.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub summary: RunSummary,
    pub experiment: Experiment,
    pub output: Option<RunOutput>,
    pub ensemble: Option<EnsembleTrace>,
}

/// Shimmed offsets and per-step magnetizations of both ensemble arms.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTrace {
    pub fbo: Vec<f64>,
    pub baseline: Vec<Vec<f64>>,
    pub shimmed: Vec<Vec<f64>>,
}

fn hardware_and_embeddings(
    config: &ExperimentConfig,
    built: &BuiltModel,
) -> CliResult<(HardwareGraph, EmbeddingSet)> {
    if config.hardware == "standalone" {
        return Ok(standalone_copies(built.model(), config.copies)?);
    }
    let hw = parse_hardware_spec(&config.hardware)?;
    let raster = RasterOptions {
        search_budget: config.embedding_budget,
        max_copies: config.copies,
        ..RasterOptions::default()
    };
    let es = match built {
        BuiltModel::Cylinder(cyl) => square_cylinder_embeddings(cyl, &hw, config.copies, raster)?,
        BuiltModel::Plain(model) => raster_embed(model, &hw, raster)?,
    };
    if es.is_empty() {
        return Err(CliError::Empty(format!(
            "no embedding of {} found on {}",
            config.name, config.hardware
        )));
    }
    Ok((hw, es))
}

fn hardware_noise(config: &ExperimentConfig, hw: &HardwareGraph) -> CliResult<NoiseModel> {
    let noise = match &config.noise_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(CliError::io(path))?;
            let noise: NoiseModel =
                serde_json::from_str(&text).map_err(|source| CliError::Json {
                    path: path.clone(),
                    source,
                })?;
            noise.validate()?;
            noise
        }
        None => NoiseModel::generate(
            hw.num_qubits(),
            &hw.graph().edges(),
            &config.noise,
            config.seed,
        )?,
    };
    if noise.num_qubits() != hw.num_qubits() {
        return Err(CliError::Usage(format!(
            "noise model covers {} qubits but {} has {}",
            noise.num_qubits(),
            hw.name(),
            hw.num_qubits()
        )));
    }
    Ok(noise)
}

/// The nominal model (boundary couplers halved on request) and, for lattices, the
/// chain decoding used for the order parameter.
fn nominal_and_psi(
    config: &ExperimentConfig,
    built: &BuiltModel,
) -> CliResult<(IsingModel, Option<PsiSpec>)> {
    let BuiltModel::Cylinder(cyl) = built else {
        return Ok((built.model().clone(), None));
    };
    let mut nominal = cyl.model.clone();
    if config.halve_boundary_couplers {
        let mut values = nominal.coupling_values().to_vec();
        for k in cyl.boundary_couplers() {
            values[k] /= 2.0;
        }
        nominal = nominal.with_values(nominal.fields().to_vec(), values)?;
    }
    let (logical, group_of) = contract_chains(&cyl.model, &cyl.chain_pairs)?;
    let mut groups = vec![Vec::new(); logical.num_spins()];
    for (s, &g) in group_of.iter().enumerate() {
        groups[g].push(s);
    }
    let coloring = three_coloring(&logical)?;
    Ok((nominal, Some(PsiSpec { groups, coloring })))
}

fn window(d: (u64, f64, f64)) -> WindowDispersion {
    WindowDispersion {
        iter: d.0,
        sigma_m: d.1,
        sigma_f: d.2,
    }
}

fn run_ensemble(
    config: &ExperimentConfig,
    spec: &EnsembleSpec,
    experiment: &Experiment,
    noise: &NoiseModel,
) -> CliResult<(EnsembleSummary, EnsembleTrace)> {
    let graph = experiment.compact_model();
    let realizations: Vec<IsingModel> = (0..spec.realizations as u64)
        .map(|r| make_spin_glass(graph, spec.coupling, config.seed, r))
        .collect::<Result<_, _>>()?;
    let sampler = config.effective_sampler();
    let mut baseline_noise = noise.clone();
    let baseline = ensemble_fbo_shim(
        &realizations,
        &mut baseline_noise,
        0.0,
        spec.cycles,
        &sampler,
    )?;
    let mut shim_noise = noise.clone();
    let shimmed = ensemble_fbo_shim(
        &realizations,
        &mut shim_noise,
        config.shim.alpha_phi,
        spec.cycles,
        &sampler,
    )?;
    let summary = EnsembleSummary {
        realizations: spec.realizations,
        cycles: spec.cycles,
        baseline: late_mean_abs(&baseline.magnetizations),
        shimmed: late_mean_abs(&shimmed.magnetizations),
    };
    let trace = EnsembleTrace {
        fbo: shimmed.fbo,
        baseline: baseline.magnetizations,
        shimmed: shimmed.magnetizations,
    };
    Ok((summary, trace))
}

/// Mean over qubits of `|time-averaged m_i|`, averaging over the second half of steps.
pub fn late_mean_abs(history: &[Vec<f64>]) -> f64 {
    let late = &history[history.len() / 2..];
    if late.is_empty() {
        return 0.0;
    }
    let n = late[0].len();
    (0..n)
        .map(|q| (late.iter().map(|m| m[q]).sum::<f64>() / late.len() as f64).abs())
        .sum::<f64>()
        / n as f64
}

/// Builds and runs an experiment without touching the file system.
pub fn execute(config: &ExperimentConfig) -> CliResult<RunArtifacts> {
    config.validate()?;
    let built = config.model.build()?;
    let (nominal, psi) = nominal_and_psi(config, &built)?;
    let (hw, es) = hardware_and_embeddings(config, &built)?;
    let hw_noise = hardware_noise(config, &hw)?;
    let mut experiment = Experiment::with_kind(nominal, es, config.shim_type, DEFAULT_BUDGET)?;
    if let Some(psi) = psi {
        experiment = experiment.with_psi(psi)?;
    }
    let mut noise = experiment.compact_noise(&hw_noise)?;
    let mut summary = RunSummary {
        name: config.name.clone(),
        seed: config.seed,
        hardware: hw.name().to_string(),
        copies: experiment.num_copies(),
        iterations: config.iterations,
        qubit_orbits: experiment.source_orbits().num_qubit_orbits(),
        coupler_orbits: experiment.source_orbits().num_coupler_orbits(),
        first_window: None,
        last_window: None,
        max_coupler_deviation: 0.0,
        clamp_events: 0,
        floor_events: 0,
        final_mean_abs_psi: None,
        ensemble: None,
    };
    if let Some(spec) = &config.ensemble {
        let (ens, trace) = run_ensemble(config, spec, &experiment, &noise)?;
        summary.ensemble = Some(ens);
        return Ok(RunArtifacts {
            summary,
            experiment,
            output: None,
            ensemble: Some(trace),
        });
    }
    let shim = config.effective_shim();
    let output = run_loop(
        &experiment,
        &mut noise,
        &shim,
        None,
        config.iterations,
        &config.effective_sampler(),
    )?;
    if output.series.len() >= shim.window {
        let d = dispersion(&output.series, shim.window, experiment.orbits())?;
        summary.first_window = d.first().copied().map(window);
        summary.last_window = d.last().copied().map(window);
    }
    summary.max_coupler_deviation = output
        .state
        .couplings
        .iter()
        .zip(experiment.compact_model().coupling_values())
        .map(|(j, j0)| ((j - j0) / j0).abs())
        .fold(0.0, f64::max);
    summary.clamp_events = output.state.clamp_events;
    summary.floor_events = output.state.floor_events;
    summary.final_mean_abs_psi = output.psi.last().map(|(_, values)| {
        values.iter().map(|z| z.norm()).sum::<f64>() / values.len().max(1) as f64
    });
    Ok(RunArtifacts {
        summary,
        experiment,
        output: Some(output),
        ensemble: None,
    })
}

/// Runs an experiment and writes its files into `out_dir`:
/// `config.json`, `orbits.json`, `summary.json` and either `series.csv`,
/// `state.json` (and `psi.csv` for lattices) or, for ensembles, `ensemble.csv` and
/// `fbo.json`.
pub fn cmd_run(
    config: &ExperimentConfig,
    out_dir: &Path,
    out: &mut dyn Write,
) -> CliResult<RunSummary> {
    fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    let path = |name: &str| -> PathBuf { out_dir.join(name) };
    write_json(&path("config.json"), config)?;
    let artifacts = execute(config)?;
    let experiment = &artifacts.experiment;
    write_json(
        &path("orbits.json"),
        &experiment.source_orbits().to_json(experiment.nominal()),
    )?;
    if let Some(output) = &artifacts.output {
        let csv = path("series.csv");
        let mut file = create(&csv)?;
        write_series_csv(
            &output.series,
            experiment.orbits(),
            config.shim.window,
            &mut file,
        )
        .and_then(|_| file.flush())
        .map_err(CliError::io(&csv))?;
        write_json(&path("state.json"), &output.state)?;
        if experiment.psi().is_some() {
            let csv = path("psi.csv");
            let mut file = create(&csv)?;
            write_psi_csv(&output.psi, &mut file)
                .and_then(|_| file.flush())
                .map_err(CliError::io(&csv))?;
        }
    }
    if let Some(trace) = &artifacts.ensemble {
        let csv = path("ensemble.csv");
        let mut file = create(&csv)?;
        write_ensemble_csv(trace, &mut file)
            .and_then(|_| file.flush())
            .map_err(CliError::io(&csv))?;
        write_json(&path("fbo.json"), &trace.fbo)?;
    }
    write_json(&path("summary.json"), &artifacts.summary)?;
    report(&artifacts.summary, out)?;
    Ok(artifacts.summary)
}

fn write_ensemble_csv(trace: &EnsembleTrace, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "arm,step,qubit,m")?;
    for (arm, history) in [("baseline", &trace.baseline), ("shimmed", &trace.shimmed)] {
        for (step, m) in history.iter().enumerate() {
            for (q, v) in m.iter().enumerate() {
                writeln!(out, "{arm},{step},{q},{v}")?;
            }
        }
    }
    Ok(())
}

fn report(summary: &RunSummary, out: &mut dyn Write) -> CliResult<()> {
    print(
        out,
        format_args!(
            "{}: {} copies on {}, {} iterations, seed {}",
            summary.name, summary.copies, summary.hardware, summary.iterations, summary.seed
        ),
    )?;
    print(
        out,
        format_args!(
            "qubit orbits: {}, coupler orbits: {}",
            summary.qubit_orbits, summary.coupler_orbits
        ),
    )?;
    if let (Some(a), Some(b)) = (summary.first_window, summary.last_window) {
        print(
            out,
            format_args!(
                "sigma_m: first window {:.5} (iter {}), last window {:.5} (iter {})",
                a.sigma_m, a.iter, b.sigma_m, b.iter
            ),
        )?;
        print(
            out,
            format_args!(
                "sigma_f: first window {:.5}, last window {:.5}",
                a.sigma_f, b.sigma_f
            ),
        )?;
    }
    if summary.ensemble.is_none() {
        print(
            out,
            format_args!(
                "max coupler deviation from nominal: {:.2}% ({} clamps, {} floors)",
                100.0 * summary.max_coupler_deviation,
                summary.clamp_events,
                summary.floor_events
            ),
        )?;
    }
    if let Some(psi) = summary.final_mean_abs_psi {
        print(
            out,
            format_args!("mean |psi| at the last iteration: {psi:.4}"),
        )?;
    }
    if let Some(e) = summary.ensemble {
        print(
            out,
            format_args!(
                "ensemble of {} x {} cycles: mean |<m>| baseline {:.5}, shimmed {:.5}",
                e.realizations, e.cycles, e.baseline, e.shimmed
            ),
        )?;
    }
    Ok(())
}
