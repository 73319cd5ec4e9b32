//! Criterion benchmarks for `erg-phase`; see `benches/phase.rs`.
