use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shimkit_core::{
    make_buckyball, make_fm_loop, make_frustrated_loop, make_square_cylinder, parse_text_model,
    IsingModel, NoiseParams, SamplerParams, ShimConfig, ShimKind, SquareCylinder,
};

use crate::error::{CliError, CliResult};

/// Version of the experiment config format understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// The logical problem an experiment embeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    FmLoop { length: usize, coupling: f64 },
    FrustratedLoop { length: usize, coupling: f64 },
    Buckyball,
    SquareCylinder { rows: usize, cols: usize, afm: f64 },
    File { path: PathBuf },
}

/// A built model; cylinders keep their chain structure for order-parameter decoding.
#[derive(Debug, Clone)]
pub enum BuiltModel {
    Plain(IsingModel),
    Cylinder(SquareCylinder),
}

impl BuiltModel {
    pub fn model(&self) -> &IsingModel {
        match self {
            BuiltModel::Plain(m) => m,
            BuiltModel::Cylinder(c) => &c.model,
        }
    }
}

impl ModelSpec {
    pub fn build(&self) -> CliResult<BuiltModel> {
        Ok(match *self {
            ModelSpec::FmLoop { length, coupling } => {
                BuiltModel::Plain(make_fm_loop(length, coupling)?)
            }
            ModelSpec::FrustratedLoop { length, coupling } => {
                BuiltModel::Plain(make_frustrated_loop(length, coupling)?)
            }
            ModelSpec::Buckyball => BuiltModel::Plain(make_buckyball()),
            ModelSpec::SquareCylinder { rows, cols, afm } => {
                BuiltModel::Cylinder(make_square_cylinder(rows, cols, afm)?)
            }
            ModelSpec::File { ref path } => BuiltModel::Plain(read_model(path)?),
        })
    }

    /// Parses the short pattern syntax of the `embed` command: `fm_loop:L`,
    /// `frustrated_loop:L`, `cylinder:RxC`, `buckyball`, or a model file path.
    pub fn from_pattern(pattern: &str) -> CliResult<Self> {
        let bad = || CliError::Usage(format!("unrecognized pattern {pattern:?}"));
        let number = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        Ok(match pattern.split_once(':') {
            Some(("fm_loop", l)) => ModelSpec::FmLoop {
                length: number(l)?,
                coupling: -1.0,
            },
            Some(("frustrated_loop", l)) => ModelSpec::FrustratedLoop {
                length: number(l)?,
                coupling: -1.0,
            },
            Some(("cylinder", dims)) => {
                let (r, c) = dims.split_once('x').ok_or_else(bad)?;
                ModelSpec::SquareCylinder {
                    rows: number(r)?,
                    cols: number(c)?,
                    afm: 1.0,
                }
            }
            _ if pattern == "buckyball" => ModelSpec::Buckyball,
            _ => ModelSpec::File {
                path: pattern.into(),
            },
        })
    }
}

/// Reads a model in the text format, reporting parse errors with the file name.
pub fn read_model(path: &Path) -> CliResult<IsingModel> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_text_model(&text).map_err(|source| CliError::Model {
        path: path.into(),
        source,
    })
}

/// Random spin-glass realizations sharing the embedded qubits and couplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub realizations: usize,
    pub cycles: usize,
    /// Magnitude of every coupling.
    pub coupling: f64,
}

/// A complete, serializable experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub name: String,
    pub model: ModelSpec,
    /// `pegasus:M`, `chimera:M[,N[,T]]` or `standalone`.
    pub hardware: String,
    /// Maximum number of embedded copies.
    pub copies: usize,
    /// Node budget of each subgraph search.
    #[serde(default = "default_embedding_budget")]
    pub embedding_budget: u64,
    #[serde(default)]
    pub noise: NoiseParams,
    /// Hardware-indexed noise model; replaces `noise` when present.
    #[serde(default)]
    pub noise_file: Option<PathBuf>,
    #[serde(default)]
    pub shim: ShimConfig,
    #[serde(default)]
    pub shim_type: ShimKind,
    #[serde(default)]
    pub halve_boundary_couplers: bool,
    /// Enables step-size adaptation (same as `shim.adaptive.enabled`).
    #[serde(default)]
    pub adaptive_step_size: bool,
    pub iterations: u64,
    #[serde(default)]
    pub sampler: SamplerParams,
    /// Runs the shared-offset ensemble shim instead of the iteration loop.
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
    /// Root of every random stream (sampler reads, noise, realizations).
    #[serde(default)]
    pub seed: u64,
}

fn default_embedding_budget() -> u64 {
    shimkit_core::RasterOptions::default().search_budget
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let config: Self = serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.into(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "config schema {} is not supported (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.copies == 0 {
            return Err(CliError::Usage("copies must be positive".into()));
        }
        if self.halve_boundary_couplers && !matches!(self.model, ModelSpec::SquareCylinder { .. }) {
            return Err(CliError::Usage(
                "halve_boundary_couplers applies to square_cylinder models only".into(),
            ));
        }
        self.shim.validate()?;
        self.sampler.validate()?;
        Ok(())
    }

    /// Shim settings with the top-level adaptation flag folded in.
    pub fn effective_shim(&self) -> ShimConfig {
        let mut shim = self.shim;
        shim.adaptive.enabled |= self.adaptive_step_size;
        shim
    }

    /// Sampler settings seeded from the experiment seed.
    pub fn effective_sampler(&self) -> SamplerParams {
        SamplerParams {
            seed: self.seed,
            ..self.sampler
        }
    }
}
