//! Criterion benchmarks for `torus-energy`; see `benches/`.
