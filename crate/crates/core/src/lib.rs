//! Smoothed-periodogram estimation of spectra and cross-spectra for
//! continuous-time stationary processes observed at a sampling rate that
//! grows with the record length.
//!
//! The crate is `no_std` (it needs `alloc`). IO, the command line and the
//! parallel Monte-Carlo driver live in the `ctspec` companion crate.
//!
//! Modules, bottom up:
//!
//! - [`kernels`]: covariance-averaging kernels and their constants `B`, `(s, k_s)`.
//! - [`rates`]: bandwidth and sampling-rate schedules `n ↦ (b_n, ρ_n)`.
//! - [`estimator`]: the lag-window cross-spectrum estimator.
//! - [`asymptotics`]: limiting covariance, normalized statistics, intervals, bias.
//! - [`simmodel`]: exact simulation of a bivariate OU-mixture process.
//! - [`mcstudy`]: Kolmogorov–Smirnov screening, coverage, joint cumulants.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod asymptotics;
pub mod error;
pub mod estimator;
pub mod kernels;
pub mod mcstudy;
pub mod numeric;
pub mod rates;
pub mod simmodel;
pub mod spectral;

pub use error::{Error, Result};
pub use estimator::{
    estimate_cross_spectrum, FrequencyGrid, MultichannelSamples, SpectralEstimate,
};
pub use kernels::Kernel;
pub use num_complex::Complex64;
pub use rates::RatePlan;
pub use simmodel::OuMixtureModel;
pub use spectral::SpectralMatrix;
