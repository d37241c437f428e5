//! Calibration refinement ("shimming") for Ising machines.
//!
//! The crate finds statistical symmetries of an Ising model (qubit and coupler
//! orbits), packs many copies of the model onto a hardware graph, samples them on a
//! simulated noisy annealer and runs feedback loops that pull every observable
//! toward its orbit mean.
//!
//! ```
//! use shimkit_core::{ising_orbits, make_frustrated_loop, DEFAULT_BUDGET};
//!
//! let model = make_frustrated_loop(6, -1.0).unwrap();
//! let orbits = ising_orbits(&model, DEFAULT_BUDGET).unwrap();
//! assert_eq!(orbits.num_qubit_orbits(), 1);
//! assert_eq!(orbits.num_coupler_orbits(), 2);
//! ```

pub mod error;
pub mod hardware;
pub mod ising;
pub mod orbits;
pub mod rng;
pub mod sampler;
pub mod shim;
pub mod stats;

pub use error::{Error, Result};
pub use hardware::{
    find_subgraph, make_chimera, make_pegasus, mask_qubits, parse_hardware_spec,
    program_embeddings, raster_embed, square_cylinder_embeddings, standalone_copies, EmbeddingSet,
    Graph, HardwareGraph, RasterOptions, SearchOutcome,
};
pub use ising::{
    build_signed, contract_chains, format_text_model, make_buckyball, make_fm_loop,
    make_frustrated_loop, make_spin_glass, make_square_cylinder, parse_text_model,
    signed_to_labeled_graph, Coupler, GaugeTransform, IsingModel, LabeledGraph, SignedIsingModel,
    SquareCylinder,
};
pub use orbits::{
    automorphism_generators, automorphism_generators_commuting, ising_orbits,
    merge_embedding_orbits, override_orbits, vertex_and_edge_orbits, OrbitClasses, Orbits,
    Permutation, UnionFind, DEFAULT_BUDGET,
};
pub use sampler::{
    effective_model, exact_stats, sample, NoiseModel, NoiseParams, SampleSet, SamplerParams,
};
pub use shim::{
    adapt_step_size, coupler_step, damp_step, ensemble_fbo_shim, fbo_step, field_step, run_loop,
    smooth_fields, Experiment, RunOutput, ShimConfig, ShimKind, ShimState, Stage, StageSchedule,
};
pub use stats::{
    decode_chains, dispersion, fit_walk_exponent, frustrations, magnetizations, orbit_means,
    order_parameter, three_coloring, ObservableSeries, SublatticeColoring,
};
