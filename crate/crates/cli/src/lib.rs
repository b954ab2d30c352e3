//! Problem-file ingestion, pipeline orchestration and reporting for the
//! variational-symmetry engine. The `noether` binary is a thin wrapper
//! over [`pipeline`].

pub mod error;
pub mod pipeline;
pub mod problem;
pub mod report;

pub use error::{CliError, CliResult};
pub use pipeline::{run_solve, run_transform, run_verify, RunOptions};
pub use problem::{load, parse_problem, ProblemFile};
pub use report::{Format, Report};
