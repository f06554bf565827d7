//! Transmission and energy model for dual prediction schemes (DPS) and
//! in-network aggregation in ring-structured wireless sensor networks.
//!
//! - [`topology`]: ring populations, children ratios and sub-tree sizes
//! - [`traffic`]: baseline and gateway-to-node traffic, dissemination cost
//! - [`prediction`]: expected DPS traffic, minimum accuracy, threshold/accuracy
//! - [`correlation`]: multivariate-normal box probabilities and aggregated traffic
//! - [`energy`]: per-node energy estimate
//! - [`simulator`]: slot-based simulator over an explicit routing tree
//! - [`validation`]: real-trace pipeline (resampling, hourly statistics, counting)
//! - [`sweep`]: parameter sweeps and the `sweep`/`simulate`/`validate` commands
//! - [`cli`]: flag parsing for the `wsn-dps` binary

// `!(x >= 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod correlation;
pub mod energy;
pub mod error;
pub mod normal;
pub mod prediction;
pub mod simulator;
pub mod sweep;
pub mod topology;
pub mod traffic;
pub mod validation;

pub use error::{Error, Result};
