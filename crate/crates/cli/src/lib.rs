//! Library side of the `privpath` binary: the benchmark engine, config-file
//! parsing for the simulator and the probe, and route-file loading. Kept as
//! a library so integration and acceptance tests can drive everything
//! in-process.

pub mod bench;
pub mod config;
pub mod pathfile;

pub use bench::{run_bench, run_bench_alice, serve_bench_bob, BenchConfig, BenchReport, TrialRecord};
pub use config::{load_probe_config, load_sim_config};
pub use pathfile::load_path;
