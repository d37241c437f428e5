//! Seed splitting.
//!
//! Every random stream in the crate is derived from one user seed:
//! `derive(seed, stream, index)` mixes the three words with SplitMix64, so streams
//! are independent of each other and of how many values earlier streams consumed.
//! Streams in use are listed as constants below.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-read Metropolis randomness; `index` is `call * 2^32 + read`.
pub const STREAM_READS: u64 = 1;
/// Random-walk drift of qubit offsets; `index` is the call number.
pub const STREAM_DRIFT: u64 = 2;
/// Generation of a noise model.
pub const STREAM_NOISE: u64 = 3;
/// Candidate order of the subgraph search.
pub const STREAM_EMBED: u64 = 4;
/// Random model realizations (ensembles, tests).
pub const STREAM_MODELS: u64 = 5;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derived 64-bit seed for `(stream, index)` under the user seed.
pub fn derive(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ stream) ^ index)
}

/// Generator for `(stream, index)` under the user seed.
pub fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, stream, index))
}
