//! Signal-to-noise analytics of the magnitude law `X ~ Geo(ψ, K)`.
//!
//! The gap between binarized and ordinal counting is governed by
//! `SNR(X) = E[X]² / Var(X)`: the smaller it is, the more binarization helps.
//! Two closed-form minimizers are provided, one over the whole simplex and
//! one over non-increasing patterns.

use serde::{Deserialize, Serialize};

use crate::model::PatternDistribution;
use crate::{Error, Result};

/// Consistency tolerance between a closed-form minimum and the SNR of the
/// constructed pattern.
const CROSS_CHECK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    /// `+inf` for a degenerate (single-point) pattern.
    #[serde(with = "crate::model::float_or_inf")]
    pub snr: f64,
}

pub fn snr_of_pattern(pattern: &PatternDistribution) -> SnrReport {
    let mean = pattern.mean();
    let second_moment = pattern.second_moment();
    let variance = if pattern.is_degenerate() {
        0.0
    } else {
        (second_moment - mean * mean).max(0.0)
    };
    let snr = if variance > 0.0 {
        mean * mean / variance
    } else {
        f64::INFINITY
    };
    SnrReport {
        mean,
        second_moment,
        variance,
        snr,
    }
}

/// A minimal SNR value together with the pattern attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalSnr {
    pub value: f64,
    pub pattern: PatternDistribution,
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::domain(format!(
            "minimal SNR needs K ≥ 2 (K = {k} has SNR(X) = ∞)"
        )));
    }
    Ok(())
}

fn cross_check(value: f64, pattern: &PatternDistribution) {
    let achieved = snr_of_pattern(pattern).snr;
    assert!(
        (achieved - value).abs() <= CROSS_CHECK_TOL * value.max(1.0),
        "closed-form SNR {value} disagrees with constructed pattern ({achieved})"
    );
}

/// `min SNR(X) = 4K/(K−1)²`, attained by mass `K/(K+1)` on 1 and `1/(K+1)` on K.
pub fn minimal_snr_unconstrained(k: usize) -> Result<MinimalSnr> {
    check_k(k)?;
    let kf = k as f64;
    let value = 4.0 * kf / ((kf - 1.0) * (kf - 1.0));
    let mut weights = vec![0.0; k];
    weights[0] = kf / (kf + 1.0);
    weights[k - 1] = 1.0 / (kf + 1.0);
    let pattern = PatternDistribution::from_weights(weights)?;
    cross_check(value, &pattern);
    Ok(MinimalSnr { value, pattern })
}

/// Minimum over non-increasing patterns, `24(K+1)/(4K²−4K+1)`.
///
/// The minimizer is uniform on `{2..K}` with extra mass on 1:
/// `p₁ = (2K²+K+2)/(2K²+5K)` and `p_k = 2(2K−1)/(K(K−1)(2K+5))` for k ≥ 2.
pub fn minimal_snr_monotone(k: usize) -> Result<MinimalSnr> {
    check_k(k)?;
    let kf = k as f64;
    let value = 24.0 * (kf + 1.0) / (4.0 * kf * kf - 4.0 * kf + 1.0);
    let tail = 2.0 * (2.0 * kf - 1.0) / (kf * (kf - 1.0) * (2.0 * kf + 5.0));
    let head = (2.0 * kf * kf + kf + 2.0) / (2.0 * kf * kf + 5.0 * kf);
    let mut weights = vec![tail; k];
    weights[0] = head;
    let pattern = PatternDistribution::from_weights(weights)?;
    cross_check(value, &pattern);
    Ok(MinimalSnr { value, pattern })
}
