//! Criterion benchmarks for the cyclic-dce kernels; see `benches/`.
