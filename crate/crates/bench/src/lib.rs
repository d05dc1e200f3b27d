//! Criterion benchmarks for g2lab live under `benches/`.
