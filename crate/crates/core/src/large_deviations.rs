//! Cramér rates at zero for the misranking events of ordinal and binarized
//! counting, and the leading-order error decay they imply.

use serde::{Deserialize, Serialize};

use crate::model::OrdinalModel;
use crate::optimize::{minimize_convex, MinimizeOptions};
use crate::ranking::PreferenceVector;
use crate::special::log_cosh;
use crate::{Error, Result};

/// Default gap between binary and ordinal error scales for the L₀ estimate.
pub const DEFAULT_CROSSOVER_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub rate: f64,
    pub argmin_lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// γ = 0 (or θ_i = θ_j): the error event has probability near ½ and the rate is 0.
    pub boundary: bool,
}

impl RateResult {
    fn boundary() -> Self {
        RateResult {
            rate: 0.0,
            argmin_lambda: 0.0,
            iterations: 0,
            converged: true,
            boundary: true,
        }
    }
}

/// `−inf_λ f(λ)` for a convex log-MGF `f`, searched from `[−a−5, a+5]`.
fn rate_from_log_mgf<F: Fn(f64) -> f64>(f: F, half_width: f64) -> RateResult {
    let opts = MinimizeOptions::default();
    let m = minimize_convex(&f, -half_width - 5.0, half_width + 5.0, &opts);
    RateResult {
        // inf ≤ f(0) = 0; clamp the last-ulp positive noise.
        rate: (-m.fx).max(0.0),
        argmin_lambda: m.x,
        iterations: m.iterations,
        converged: m.converged,
        boundary: false,
    }
}

/// Binary rate `log cosh φ(γ)`, attained at `λ = −φ(γ)`.
pub fn rate_at_zero_binary(model: &OrdinalModel, gamma: f64) -> RateResult {
    if gamma == 0.0 {
        return RateResult::boundary();
    }
    let phi = model.phi(gamma);
    RateResult {
        rate: log_cosh(phi),
        argmin_lambda: -phi,
        iterations: 0,
        converged: true,
        boundary: false,
    }
}

/// Ordinal rate `log cosh φ − inf_λ log Σ_k w_k cosh(φ + λk)`.
pub fn rate_at_zero_ordinal(model: &OrdinalModel, gamma: f64) -> RateResult {
    if gamma == 0.0 {
        return RateResult::boundary();
    }
    let phi = model.phi(gamma);
    rate_from_log_mgf(|lambda| model.log_mgf_at_phi(phi, lambda), phi.abs())
}

/// Rate of `Z_ij = 2y_ij + Σ_{k≠i,j}(y_ik + y_kj) ≤ 0` (sign analogue when
/// `binarized`), using independence of the constituent comparisons.
pub fn rate_at_zero_nitem(
    model: &OrdinalModel,
    theta: &PreferenceVector,
    i: usize,
    j: usize,
    binarized: bool,
) -> Result<RateResult> {
    let n = theta.n();
    if i == j || i >= n || j >= n {
        return Err(Error::domain(format!("bad pair ({i}, {j}) for n = {n}")));
    }
    if theta.gamma(i, j) == 0.0 {
        return Ok(RateResult::boundary());
    }
    let law = if binarized { model.binarized() } else { model.clone() };
    let phi_ij = law.phi(theta.gamma(i, j));
    let others: Vec<(f64, f64)> = (0..n)
        .filter(|&k| k != i && k != j)
        .map(|k| (law.phi(theta.gamma(i, k)), law.phi(theta.gamma(k, j))))
        .collect();
    let half_width = others
        .iter()
        .flat_map(|(a, b)| [a.abs(), b.abs()])
        .fold(phi_ij.abs(), f64::max);
    let f = |lambda: f64| {
        law.log_mgf_at_phi(phi_ij, 2.0 * lambda)
            + others
                .iter()
                .map(|&(a, b)| law.log_mgf_at_phi(a, lambda) + law.log_mgf_at_phi(b, lambda))
                .sum::<f64>()
    };
    Ok(rate_from_log_mgf(f, half_width))
}

/// Leading-order error scale `e^{−L·rate}`.
pub fn error_decay_prediction(rate: &RateResult, rounds: u64) -> f64 {
    (-(rounds as f64) * rate.rate).exp()
}

/// Smallest L with `e^{−L·Ĩ} · factor ≤ e^{−L·I}`, i.e. the binary error
/// scale below the ordinal one by `factor`. `None` when `Ĩ ≤ I`.
///
/// A heuristic from leading-order decay only; it ignores polynomial prefactors.
pub fn predicted_crossover(ordinal: &RateResult, binary: &RateResult, factor: f64) -> Option<u64> {
    let gap = binary.rate - ordinal.rate;
    if !(gap > 0.0) || !(factor >= 1.0) {
        return None;
    }
    Some(((factor.ln() / gap).ceil() as u64).max(1))
}

/// Both two-item rates plus the L₀ heuristic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateComparison {
    pub gamma: f64,
    pub ordinal: RateResult,
    pub binary: RateResult,
    pub factor: f64,
    /// Heuristic estimate, not a bound.
    pub predicted_l0: Option<u64>,
}

pub fn compare_rates(model: &OrdinalModel, gamma: f64, factor: f64) -> RateComparison {
    let ordinal = rate_at_zero_ordinal(model, gamma);
    let binary = rate_at_zero_binary(model, gamma);
    RateComparison {
        gamma,
        ordinal,
        binary,
        factor,
        predicted_l0: predicted_crossover(&ordinal, &binary, factor),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PatternDistribution, StrengthLink};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn model(link: StrengthLink, pattern: PatternDistribution) -> OrdinalModel {
        OrdinalModel::new(link, pattern)
    }

    // Minimum of f over an evenly spaced grid on [lo, hi].
    fn grid_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> f64 {
        let steps = ((hi - lo) / step).round() as usize;
        (0..=steps)
            .map(|s| f(lo + s as f64 * step))
            .fold(f64::INFINITY, f64::min)
    }

    // Direct log((eˣ + e⁻ˣ)/2); fine for the moderate arguments used here.
    fn log_cosh_direct(x: f64) -> f64 {
        ((x.exp() + (-x).exp()) / 2.0).ln()
    }

    #[test]
    fn binary_examples() {
        let m = model(StrengthLink::identity(), PatternDistribution::uniform(3).unwrap());
        let r = rate_at_zero_binary(&m, 0.5);
        assert_abs_diff_eq!(r.rate, log_cosh_direct(0.5), epsilon = 1e-9);
        assert_abs_diff_eq!(r.rate, 0.12011450695827752, epsilon = 1e-15);
        assert_eq!(r.argmin_lambda, -0.5);
        assert_eq!(rate_at_zero_binary(&m, -0.5).rate, r.rate);
        let z = rate_at_zero_binary(&m, 0.0);
        assert!(z.boundary && z.rate == 0.0);
        assert!(rate_at_zero_binary(&m, 1e-9).rate < 1e-17);
    }

    #[test]
    fn degenerate_on_one_matches_binary() {
        let m = model(StrengthLink::tanh_sigmoid(), PatternDistribution::degenerate(4, 1).unwrap());
        for g in [0.1, 0.7, -1.3] {
            let o = rate_at_zero_ordinal(&m, g);
            assert!(o.converged);
            assert_abs_diff_eq!(o.rate, rate_at_zero_binary(&m, g).rate, epsilon = 1e-12);
        }
    }

    #[test]
    fn ordinal_rate_against_grid() {
        let m = model(StrengthLink::identity(), PatternDistribution::uniform(2).unwrap());
        let r = rate_at_zero_ordinal(&m, 0.5);
        assert!(r.converged && !r.boundary);
        assert!(r.rate > 0.0 && r.rate < log_cosh_direct(0.5));
        let grid = grid_min(|l| m.log_mgf(0.5, l), -1.5, 1.5, 1e-4);
        assert_abs_diff_eq!(-r.rate, grid, epsilon = 1e-6);
        assert!(-r.rate <= grid + 1e-9);
        assert!(r.argmin_lambda < 0.0 && r.argmin_lambda > -0.5);
    }

    #[test]
    fn nitem_two_items_match_two_item_rates() {
        let m = model(StrengthLink::identity(), PatternDistribution::abs_decay(4, 0.1).unwrap());
        let theta = PreferenceVector::new(vec![0.15, 0.0]).unwrap();
        let o = rate_at_zero_nitem(&m, &theta, 0, 1, false).unwrap();
        let b = rate_at_zero_nitem(&m, &theta, 0, 1, true).unwrap();
        assert_abs_diff_eq!(o.rate, rate_at_zero_ordinal(&m, 0.15).rate, epsilon = 1e-12);
        assert_abs_diff_eq!(b.rate, rate_at_zero_binary(&m, 0.15).rate, epsilon = 1e-12);
    }

    #[test]
    fn nitem_three_items_against_grid() {
        let m = model(StrengthLink::identity(), PatternDistribution::uniform(2).unwrap());
        let theta = PreferenceVector::equally_spaced(3, 0.3).unwrap();
        for binarized in [false, true] {
            let law = if binarized { m.binarized() } else { m.clone() };
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let r = rate_at_zero_nitem(&m, &theta, i, j, binarized).unwrap();
                let k = 3 - i - j;
                let f = |l: f64| {
                    law.log_mgf(theta.gamma(i, j), 2.0 * l)
                        + law.log_mgf(theta.gamma(i, k), l)
                        + law.log_mgf(theta.gamma(k, j), l)
                };
                let grid = grid_min(f, -2.0, 2.0, 1e-4);
                assert_abs_diff_eq!(-r.rate, grid, epsilon = 1e-6);
            }
        }
        let o = rate_at_zero_nitem(&m, &theta, 0, 2, false).unwrap();
        let b = rate_at_zero_nitem(&m, &theta, 0, 2, true).unwrap();
        assert!(b.rate > o.rate);
        assert!(rate_at_zero_nitem(&m, &theta, 1, 1, false).is_err());
    }

    #[test]
    fn decay_and_crossover() {
        let zero = RateResult::boundary();
        assert_eq!(error_decay_prediction(&zero, 1_000_000), 1.0);

        let m = model(StrengthLink::identity(), PatternDistribution::abs_decay(4, 0.1).unwrap());
        let c = compare_rates(&m, 0.15, DEFAULT_CROSSOVER_FACTOR);
        assert!(c.binary.rate > c.ordinal.rate);
        let l0 = c.predicted_l0.unwrap();
        let ratio = |l: u64| error_decay_prediction(&c.binary, l) / error_decay_prediction(&c.ordinal, l);
        assert!(ratio(l0) <= 0.1 + 1e-12);
        assert!(ratio(l0 - 1) > 0.1);
        let mut prev = 1.0;
        for l in (50..=500).step_by(50) {
            let r = ratio(l);
            assert!(r < prev);
            prev = r;
        }
        assert_eq!(predicted_crossover(&c.binary, &c.ordinal, 10.0), None);
    }

    proptest! {
        #[test]
        fn ordering_and_grid_soundness(
            gamma in 0.05f64..1.0,
            beta in 0.0f64..1.0,
            k in 2usize..7,
            link in 0usize..4,
        ) {
            let link = match link {
                0 => StrengthLink::identity(),
                1 => StrengthLink::cubic(),
                2 => StrengthLink::tanh_sigmoid(),
                _ => StrengthLink::thurstone_mosteller(),
            };
            let m = model(link, PatternDistribution::abs_decay(k, beta).unwrap());
            let o = rate_at_zero_ordinal(&m, gamma);
            let b = rate_at_zero_binary(&m, gamma);
            prop_assert!(o.converged);
            prop_assert!(b.rate > o.rate && o.rate > 0.0);
            let phi = m.phi(gamma);
            let grid = grid_min(|l| m.log_mgf(gamma, l), -phi - 1.0, 1.0, 1e-3);
            prop_assert!(-o.rate <= grid + 1e-9);
        }
    }
}
