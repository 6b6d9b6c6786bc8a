//! Criterion benchmarks for `lenient-bandits` live in `benches/`.
