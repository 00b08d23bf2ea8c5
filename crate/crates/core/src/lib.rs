//! Ordinal paired-comparison modelling and counting-based ranking recovery.
//!
//! The crate is organised around the generative model `G(φ, ψ, γ, K)`:
//!
//! * [`model`] holds strength links, pattern distributions and the ordinal
//!   model itself (exact pmf, sampling, moments, log-MGF).
//! * [`pattern_analysis`] computes SNR reports and the minimal-SNR patterns.
//! * [`ranking`] implements the counting scores, Kendall tau and the
//!   closed-form asymptotic predictors.
//! * [`large_deviations`] evaluates Cramér rates at zero for ordinal and
//!   binarized data.
//! * [`harness`] runs the seeded Monte-Carlo experiments.
//! * [`data`] ingests ratings and runs the held-out pair evaluation.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
mod error;
pub mod harness;
pub mod large_deviations;
pub mod model;
pub mod optimize;
pub mod pattern_analysis;
pub mod ranking;
pub mod seed;
pub mod special;

pub use error::{Error, Result};
pub use model::{BaseCdf, OrdinalModel, PatternDistribution, StrengthLink};
