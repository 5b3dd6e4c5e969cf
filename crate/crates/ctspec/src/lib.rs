//! Command-line pipeline around `ctspec-core`: simulate a bivariate OU
//! mixture, estimate spectra and cross-spectra from CSV samples, build
//! pointwise confidence intervals, and run the Monte-Carlo coverage study
//! on a thread pool with reproducible output.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;

pub use error::{CliError, CliResult};
