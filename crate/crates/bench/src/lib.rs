//! Benchmarks for the core kernels; run with `cargo bench -p zerofree-bench`.
