//! Benchmark-only crate; see `benches/shimkit.rs`.
