//! Criterion benchmarks for the `shiftbound` measures and trainers. See `benches/`.
