//! Criterion benchmarks for the reasoner live in `benches/`.
