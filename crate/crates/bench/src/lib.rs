//! Benchmarks for the dominance deciders live in `benches/`.
