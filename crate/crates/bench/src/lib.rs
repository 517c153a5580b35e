//! Criterion benchmarks for `cvqkd-core`; see `benches/core.rs`.
