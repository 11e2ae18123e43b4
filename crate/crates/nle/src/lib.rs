#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Std companion to `nle-core`: configuration, NLGF/CSV files, parallel
//! Monte Carlo and the named experiment presets behind the `nle` binary.

pub mod config;
pub mod io;
pub mod mc;
pub mod presets;

pub use config::{ConfigError, ExperimentConfig};
pub use presets::{run_preset, summary, Criterion, PresetError, PresetReport, PRESETS};
