//! Criterion benchmarks for steinctrl; see `benches/`.
