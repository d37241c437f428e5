//! Hardware graphs (Chimera, Pegasus), subgraph search and packing of disjoint copies.

mod embed;
mod lattice;
mod search;
mod topology;

pub use embed::{program_embeddings, raster_embed, standalone_copies, EmbeddingSet, RasterOptions};
pub use lattice::square_cylinder_embeddings;
pub use search::{find_subgraph, verify_map, SearchOptions, SearchOutcome};
pub use topology::{
    make_chimera, make_pegasus, mask_qubits, parse_hardware_spec, pegasus_cell,
    pegasus_coordinates, pegasus_index, Cell, Graph, HardwareGraph,
};
