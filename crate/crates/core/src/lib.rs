//! Spline-backfitted kernel (SPBK) estimation for additive nonparametric
//! regression and autoregression.
//!
//! Estimation runs in two stages. A least-squares fit on constant B-splines
//! ([`pilot`]) gives quick, undersmoothed estimates of every additive
//! component. For each axis those pilot estimates are removed from the
//! response, leaving a univariate problem that is re-smoothed with
//! Nadaraya-Watson ([`backfit`]). The [`simulation`] module holds seeded
//! generators and a Monte Carlo driver for nonlinear additive
//! autoregression and high-dimensional heteroscedastic designs; [`report`]
//! carries the CSV/JSON file formats and the command implementations behind
//! the `spbk` binary.
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backfit;
pub mod basis;
pub mod error;
pub mod kernel;
pub mod lsq;
pub mod pilot;
pub mod report;
pub mod sample;
pub mod simulation;

pub use backfit::{
    confidence_band, full_fit, oracle_component, pseudo_responses, spbk_component, AdditiveFit,
    AdditiveTruth, BiasMode, ResidualScale, SpbkFit,
};
pub use error::{Result, SpbkError};
pub use kernel::{Bandwidth, KernelSpec};
pub use pilot::{choose_knot_count, fit_pilot, PilotFit};
pub use sample::{DomainMap, LagSpec, RangeMode, RegressionSample};
