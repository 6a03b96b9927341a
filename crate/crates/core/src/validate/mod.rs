//! Live invariant checks backing the `validate` subcommand.

pub mod dd;
pub mod kernel_fd;
pub mod suite;

pub use suite::{run_validation, Check, Report, ValidateOptions};
