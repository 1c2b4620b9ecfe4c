//! Core building blocks for benchmarking IoT time-series databases.
//!
//! This crate is the allocation-only half of the `tsbench` workspace. It holds
//! everything that is pure computation: seeded random streams, the sensor data
//! generators (parametric distributions, periodic sample replay, fitted
//! generator models), workload and query synthesis, the lossless segment
//! codecs, the reference query semantics, and the performance / cost metric
//! math. Nothing here touches the clock, threads or the filesystem; the
//! companion `tsbench` crate layers drivers, storage adapters and the CLI on
//! top.
//!
//! The crate is `no_std` (with `alloc`) so the generators and codecs can be
//! embedded elsewhere, and all floating-point math goes through `libm` so a
//! given seed produces byte-identical streams on every platform.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod codec;
pub mod datagen;
pub mod error;
pub mod metrics;
mod num;
pub mod point;
pub mod query;
pub mod rng;
pub mod workload;

pub use error::{Error, Result};
pub use point::{DataPoint, Timestamp, Value, ValueKind};
