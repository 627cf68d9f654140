//! Batch front end: task files and flags, dispatch to the numerical
//! laboratory, JSON summaries and plot-ready CSV output.
//!
//! Exit codes: 0 all audits pass, 2 audit failure, 3 cap exceeded /
//! infeasible / non-convergent, 4 input error.

pub mod correlate;
pub mod error;
pub mod plot;
pub mod run;
pub mod task;

pub use error::{CliError, Result};
pub use plot::{emit_plot_data, PlotKind};
pub use run::{evaluate, run_task, RunOutcome, Status, TaskReport};
pub use task::{parse_task_file, parse_task_str, task_from_flags, Overrides, TaskKind, TaskSpec};
