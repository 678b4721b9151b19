//! Benchmark-only package; see `benches/lab.rs`.
