//! Criterion benchmarks for the question pipeline; see `benches/`.
