use serde::{Deserialize, Serialize};
use shimkit_core::shim::StageSchedule;
use shimkit_core::{NoiseParams, SamplerParams, ShimConfig, ShimKind};

use crate::config::{EnsembleSpec, ExperimentConfig, ModelSpec, SCHEMA_VERSION};

/// Built-in experiments. Each runs end-to-end from a seed alone; the default sizes
/// are reduced for a single machine and `paper_scale` restores the full protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentPreset {
    FmLoopBalancing,
    FmLoopCorrelations,
    FrustratedLoop,
    BuckyballOrbits,
    TafmForwardAnneal,
    Ensemble,
}

impl ExperimentPreset {
    pub const ALL: [ExperimentPreset; 6] = [
        ExperimentPreset::FmLoopBalancing,
        ExperimentPreset::FmLoopCorrelations,
        ExperimentPreset::FrustratedLoop,
        ExperimentPreset::BuckyballOrbits,
        ExperimentPreset::TafmForwardAnneal,
        ExperimentPreset::Ensemble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentPreset::FmLoopBalancing => "fm_loop_balancing",
            ExperimentPreset::FmLoopCorrelations => "fm_loop_correlations",
            ExperimentPreset::FrustratedLoop => "frustrated_loop",
            ExperimentPreset::BuckyballOrbits => "buckyball_orbits",
            ExperimentPreset::TafmForwardAnneal => "tafm_forward_anneal",
            ExperimentPreset::Ensemble => "ensemble",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn config(self, seed: u64, paper_scale: bool) -> ExperimentConfig {
        let desk_sampler = SamplerParams {
            reads: 100,
            sweeps: 100,
            ..SamplerParams::default()
        };
        let paper_sampler = SamplerParams {
            reads: 100,
            sweeps: 1000,
            ..SamplerParams::default()
        };
        let sampler = if paper_scale {
            paper_sampler
        } else {
            desk_sampler
        };
        let pegasus = if paper_scale {
            "pegasus:16"
        } else {
            "pegasus:6"
        };
        let stages = |fbo: u64, coupler: Option<u64>| StageSchedule {
            fbo: Some(fbo),
            coupler,
            ..StageSchedule::default()
        };
        let base = ExperimentConfig {
            schema: SCHEMA_VERSION,
            name: self.name().into(),
            model: ModelSpec::FmLoop {
                length: 64,
                coupling: -0.2,
            },
            hardware: pegasus.into(),
            copies: 4,
            embedding_budget: 1_000_000,
            noise: NoiseParams::default(),
            noise_file: None,
            shim: ShimConfig::default(),
            shim_type: ShimKind::EmbeddedFinite,
            halve_boundary_couplers: false,
            adaptive_step_size: false,
            iterations: 100,
            sampler,
            ensemble: None,
            seed,
        };
        match self {
            ExperimentPreset::FmLoopBalancing => ExperimentConfig {
                shim: ShimConfig {
                    stages: stages(10, None),
                    alpha_phi: 1e-5,
                    ..ShimConfig::default()
                },
                iterations: 100,
                ..base
            },
            ExperimentPreset::FmLoopCorrelations => ExperimentConfig {
                shim: ShimConfig {
                    stages: stages(100, Some(200)),
                    alpha_phi: 1e-5,
                    alpha_j: 1e-3,
                    ..ShimConfig::default()
                },
                iterations: 300,
                ..base
            },
            ExperimentPreset::FrustratedLoop => ExperimentConfig {
                model: ModelSpec::FrustratedLoop {
                    length: 16,
                    coupling: -0.9,
                },
                copies: if paper_scale { 165 } else { 8 },
                embedding_budget: 100_000,
                noise: NoiseParams {
                    gain_sigma: 0.1,
                    ..NoiseParams::default()
                },
                shim: ShimConfig {
                    stages: stages(100, Some(200)),
                    alpha_phi: 1e-5,
                    alpha_j: 1.0,
                    ..ShimConfig::default()
                },
                iterations: 300,
                ..base
            },
            ExperimentPreset::BuckyballOrbits => ExperimentConfig {
                model: ModelSpec::Buckyball,
                hardware: "standalone".into(),
                copies: 4,
                shim: ShimConfig {
                    stages: stages(10, None),
                    ..ShimConfig::default()
                },
                iterations: 50,
                ..base
            },
            ExperimentPreset::TafmForwardAnneal => {
                let (cols, copies) = if paper_scale { (12, 10) } else { (6, 2) };
                let (fbo, coupler, iterations) = if paper_scale {
                    (100, 300, 800)
                } else {
                    (20, 40, 100)
                };
                ExperimentConfig {
                    model: ModelSpec::SquareCylinder {
                        rows: 6,
                        cols,
                        afm: 0.9,
                    },
                    hardware: if paper_scale {
                        "pegasus:16"
                    } else {
                        "pegasus:8"
                    }
                    .into(),
                    copies,
                    shim: ShimConfig {
                        stages: stages(fbo, Some(coupler)),
                        alpha_phi: 1e-5,
                        alpha_j: 1e-3,
                        ..ShimConfig::default()
                    },
                    shim_type: ShimKind::TriangularInfinite,
                    halve_boundary_couplers: true,
                    iterations,
                    ..base
                }
            }
            ExperimentPreset::Ensemble => ExperimentConfig {
                model: ModelSpec::SquareCylinder {
                    rows: 6,
                    cols: 6,
                    afm: 1.0,
                },
                hardware: "pegasus:8".into(),
                copies: 2,
                shim: ShimConfig {
                    alpha_phi: 1e-5,
                    ..ShimConfig::default()
                },
                iterations: 0,
                ensemble: Some(EnsembleSpec {
                    realizations: if paper_scale { 300 } else { 30 },
                    cycles: 20,
                    coupling: 1.0,
                }),
                ..base
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_named() {
        for p in ExperimentPreset::ALL {
            assert_eq!(ExperimentPreset::from_name(p.name()), Some(p));
            for full in [false, true] {
                let c = p.config(3, full);
                c.validate().unwrap();
                assert_eq!(c.name, p.name());
                assert_eq!(c.seed, 3);
            }
        }
        assert_eq!(ExperimentPreset::from_name("nope"), None);
    }

    #[test]
    fn preset_configs_roundtrip_through_json() {
        for p in ExperimentPreset::ALL {
            let c = p.config(11, false);
            let text = serde_json::to_string_pretty(&c).unwrap();
            let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, c);
        }
    }
}
