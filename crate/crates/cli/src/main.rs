use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shimkit_cli::config::ExperimentConfig;
use shimkit_cli::error::EXIT_USAGE;
use shimkit_cli::{
    cmd_embed, cmd_noise_gen, cmd_orbits, cmd_run, CliError, CliResult, EmbedOptions,
    ExperimentPreset,
};
use shimkit_core::{NoiseParams, RasterOptions, DEFAULT_BUDGET};

/// Shimming experiments on a simulated noisy annealer.
///
/// Exit codes: 0 success, 1 failure, 2 usage error, 3 empty result, 4 budget exceeded.
#[derive(Debug, Parser)]
#[command(name = "shimkit", version)]
struct Cli {
    /// Worker threads for sampling (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Qubit and coupler orbits of a model file.
    Orbits {
        /// Model in the text format.
        model: PathBuf,
        /// Write the orbit JSON document here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Node budget of the automorphism search.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Disjoint copies of a pattern on a hardware graph.
    Embed(EmbedArgs),
    /// Runs a preset or a config file.
    Run(RunArgs),
    /// Generates a hardware noise model.
    NoiseGen(NoiseArgs),
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// `fm_loop:L`, `frustrated_loop:L`, `cylinder:RxC`, `buckyball` or a model file.
    #[arg(long)]
    pattern: String,
    /// `pegasus:M` or `chimera:M[,N[,T]]`.
    #[arg(long)]
    hardware: String,
    /// Search window in cells, `RxC`.
    #[arg(long, default_value = "2x2", value_parser = parse_block)]
    block: (usize, usize),
    /// Seed of the search order; omitted means plain index order.
    #[arg(long)]
    seed: Option<u64>,
    /// Node budget of each window search.
    #[arg(long, default_value_t = RasterOptions::default().search_budget)]
    budget: u64,
    /// Stop after this many copies.
    #[arg(long)]
    max_copies: Option<usize>,
    /// Write the embedding JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Preset name or path of a config JSON file.
    experiment: String,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Use the full-size protocol of a preset.
    #[arg(long)]
    paper_scale: bool,
    /// Overrides the iteration count.
    #[arg(long)]
    iterations: Option<u64>,
    /// Hardware noise JSON (see `noise-gen`).
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Enables step-size adaptation.
    #[arg(long)]
    adaptive_step_size: bool,
    /// Adaptation check period in iterations.
    #[arg(long)]
    adapt_every: Option<u64>,
    /// Print the resolved config JSON and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// `pegasus:M` or `chimera:M[,N[,T]]`.
    hardware: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = NoiseParams::default().offset_sigma)]
    offset_sigma: f64,
    #[arg(long, default_value_t = NoiseParams::default().gain_sigma)]
    gain_sigma: f64,
    #[arg(long, default_value_t = NoiseParams::default().crosstalk_kappa)]
    kappa: f64,
    #[arg(long, default_value_t = NoiseParams::default().fbo_scale)]
    fbo_scale: f64,
    #[arg(long, default_value_t = NoiseParams::default().drift_sigma)]
    drift_sigma: f64,
    #[arg(long, default_value = "noise.json")]
    out: PathBuf,
}

fn parse_block(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once('x')
        .ok_or_else(|| format!("expected RxC, got {s:?}"))?;
    let n = |v: &str| v.parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((n(r)?, n(c)?))
}

fn resolve_config(args: &RunArgs) -> CliResult<ExperimentConfig> {
    let mut config = match ExperimentPreset::from_name(&args.experiment) {
        Some(preset) => preset.config(args.seed.unwrap_or(0), args.paper_scale),
        None => {
            if args.paper_scale {
                return Err(CliError::Usage(
                    "--paper-scale applies to presets only".into(),
                ));
            }
            let path = PathBuf::from(&args.experiment);
            if !path.exists() {
                let names: Vec<&str> = ExperimentPreset::ALL.iter().map(|p| p.name()).collect();
                return Err(CliError::Usage(format!(
                    "{:?} is neither a preset ({}) nor a file",
                    args.experiment,
                    names.join(", ")
                )));
            }
            ExperimentConfig::load(&path)?
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(iterations) = args.iterations {
        config.iterations = iterations;
    }
    if let Some(noise) = &args.noise {
        config.noise_file = Some(noise.clone());
    }
    config.adaptive_step_size |= args.adaptive_step_size;
    if let Some(every) = args.adapt_every {
        config.shim.adaptive.every = every;
    }
    config.validate()?;
    Ok(config)
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Orbits {
            model,
            out: json,
            budget,
        } => {
            cmd_orbits(&model, budget, json.as_deref(), out)?;
        }
        Command::Embed(args) => {
            let options = EmbedOptions {
                pattern: args.pattern,
                hardware: args.hardware,
                block: args.block,
                budget: args.budget,
                max_copies: args.max_copies.unwrap_or(usize::MAX),
                seed: args.seed,
            };
            cmd_embed(&options, args.out.as_deref(), out)?;
        }
        Command::Run(args) => {
            let config = resolve_config(&args)?;
            if args.dump_config {
                let text =
                    serde_json::to_string_pretty(&config).map_err(|source| CliError::Json {
                        path: "<stdout>".into(),
                        source,
                    })?;
                writeln!(out, "{text}").map_err(CliError::io("<stdout>"))?;
            } else {
                cmd_run(&config, &args.out, out)?;
            }
        }
        Command::NoiseGen(args) => {
            let params = NoiseParams {
                offset_sigma: args.offset_sigma,
                gain_sigma: args.gain_sigma,
                crosstalk_kappa: args.kappa,
                fbo_scale: args.fbo_scale,
                drift_sigma: args.drift_sigma,
            };
            cmd_noise_gen(&args.hardware, &params, args.seed, &args.out, out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
