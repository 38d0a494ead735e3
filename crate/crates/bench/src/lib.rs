//! Benchmarks live under `benches/`; run them with `cargo bench -p sl2count-bench`.
