//! Benchmark-only crate; see `benches/branchpoint.rs`.
