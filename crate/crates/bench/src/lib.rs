//! Criterion benchmarks for the core optimizers; see `benches/`.
