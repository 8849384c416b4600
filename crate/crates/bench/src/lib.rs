//! Criterion benchmarks for lenscs-core live in `benches/`.
