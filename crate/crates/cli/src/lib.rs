//! File-based front-end for `aadcurve`: correlation CSV in, curve CSV, JSON
//! reports and SVG plots out.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod io;
pub mod plot;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult, ExitKind};
