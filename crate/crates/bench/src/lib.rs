//! Criterion benchmarks for `beflow`; see `benches/`.
