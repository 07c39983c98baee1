//! Criterion benchmarks for `wstate-ecp`; see `benches/protocol.rs`.
