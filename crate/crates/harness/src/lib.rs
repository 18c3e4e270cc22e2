//! Experiment harness for `bandit-mdp`: regret accounting against the exact
//! DP oracle, (instance × algorithm × seed) grids, CSV and SVG output.

mod config;
mod error;
mod grid;
mod instance;
mod output;
mod regret;

pub use config::{default_stride, ExperimentConfig};
pub use error::HarnessError;
pub use grid::{run_cell, run_grid, CellFailure, GridResult, RuntimeRow};
pub use instance::{load_instance, ApplicationSpec, InstanceRef};
pub use output::{emit_csv, emit_svg, parse_csv, render_svg, write_csv};
pub use regret::{policy_values, RegretTrace, TracePoint};
