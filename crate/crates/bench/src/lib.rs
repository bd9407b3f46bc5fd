//! Criterion benchmarks for the simulation pipeline; see `benches/`.
