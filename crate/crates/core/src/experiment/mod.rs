//! Experiment runner: configuration, the algebraic verification suite,
//! parameter sweeps and their CSV / plot output.

pub mod config;
pub mod output;
pub mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, PulseSetting};
pub use output::{loglog_slope, plot_script, Table};
