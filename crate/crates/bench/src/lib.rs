//! Criterion benchmarks for `augarch-core`; see `benches/`.
