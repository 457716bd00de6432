//! Experiment harness: configs, command dispatch, traces and plot data.
//!
//! Exit codes: 0 when every assertion holds, 1 on an assertion failure,
//! 2 when a budget runs out, 3 on a config error.

pub mod app;
pub mod commands;
pub mod config;
pub mod plot;
pub mod suites;
pub mod trace;

pub use commands::run;
pub use config::{Command, ConfigError, ExperimentConfig, Format, NamedSet};
pub use plot::{emit_plot_data, PlotData};
pub use suites::{demo_kakutani, selftest};
pub use trace::{Outcome, RunTrace, ARTIFACT_VERSION};
