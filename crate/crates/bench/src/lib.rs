//! Criterion benchmarks for the exact engine and the shot simulator; see `benches/`.
