//! Pointwise Hurst–Hölder regularity of log-price series and its link to
//! realized volatility.
//!
//! The crate is organised around the σ–H law `σ = √V_H · N^{-H}`, where `V_H`
//! is the unit-lag increment variance of a kernel-normalised fractional
//! Brownian motion:
//!
//! - [`specfun`]: closed forms of `V_H`, `A(H)`, `E(H)` and the moments of
//!   `E(H)` under a Gaussian Hurst exponent.
//! - [`synth`]: seeded generators (fBm/fGn, multifractional processes with
//!   random exponent, fOU-driven Hurst paths, AR(1)/IID demo series).
//! - [`estimate`]: rolling-window `Ĥ_t` and `σ̂_t`, the martingale confidence
//!   band, ACF, summary statistics and the ADF test.
//! - [`fairvol`]: fitting the two-parameter σ–H curve and reading off the
//!   fair volatility at `H = ½`.
//! - [`cli`]: CSV ingestion, the `analyze` / `synth` / `verify` commands and
//!   their file outputs.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

// `!(x > 0.0)` is used on purpose so NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod estimate;
pub mod fairvol;
pub mod rng;
pub mod series;
pub mod specfun;
pub mod synth;

pub use series::{SeriesRole, TimeSeries};
pub use specfun::{GaussianHurstLaw, HurstValue, VhForm, HURST_EPS};
