//! Criterion benchmarks for the phonocat numerics; see `benches/`.
