//! Experiment runner for the multi-tier network simulator: config parsing,
//! Monte Carlo sweeps with paired seeding, CSV and SVG emission, and the
//! small-instance oracle suite. The `converge-sim` binary is a thin shell
//! over this library.

// Validation predicates are written in rejecting form (`!(x > 0)`) so that
// NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv_out;
pub mod oracle;
pub mod plot;
pub mod runner;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use csv_out::{csv_string, write_csv};
pub use oracle::{run_oracle_suite, OracleReport};
pub use plot::{plot_string, write_plot, PlotMetric};
pub use runner::{run_drop, run_sweep, DropResult, RunError, SweepOutcome, THREADS_ENV_VAR};
