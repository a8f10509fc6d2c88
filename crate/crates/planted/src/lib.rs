//! Harness, file formats and command-line front end for `planted-core`.
//!
//! The modules here need `std`: JSON and CSV IO, thread-parallel Monte Carlo
//! experiments, goodness-of-fit statistics, the parameter schedules of the
//! hardness theorems, and the built-in validation checks.

pub mod error;
pub mod experiment;
pub mod io;
pub mod schedule;
pub mod stats;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
pub use experiment::{run_error_experiment, ErrorReport, ExperimentConfig, Pipeline, SolverSpec};
pub use io::Instance;
pub use schedule::{param_schedule, ScheduleResult, Theorem};
pub use stats::{exact_tv_small, gof_test, two_sample_test, Method, TestReport};
pub use sweep::{phase_sweep, GridPoint, SweepRow, CSV_HEADER};
