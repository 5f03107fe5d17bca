//! Time-cluster/spatial-lobe channel simulation with full-sphere antenna
//! patterns, directional filtering and delay-spread statistics.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod batch;
pub mod calibration;
pub mod channel;
pub mod config;
pub mod directional;
pub mod rng;
pub mod stats;
