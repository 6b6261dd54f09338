//! Criterion benchmarks for the `translocal-core` kernels.
//!
//! Run with `cargo bench -p translocal-bench`; the benchmarks live in
//! `benches/kernels.rs` and this library is empty.
