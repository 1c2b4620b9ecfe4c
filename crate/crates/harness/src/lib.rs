//! Benchmark harness for IoT time-series databases.
//!
//! Builds on `tsbench-core` (generators, workloads, codecs, metric math) and
//! adds everything that touches the outside world: the pluggable SUT adapter
//! layer with the reference segment-file store and the modeled self-test
//! SUT, the multi-threaded benchmark driver with its phased execution and
//! data checks, config/sample/report file formats, analytic curve sweeps,
//! and the CLI.

pub mod cli;
pub mod config;
pub mod driver;
pub mod report;
pub mod sample;
pub mod sut;
pub mod sweep;
