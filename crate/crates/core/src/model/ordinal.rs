use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PatternDistribution, StrengthLink};
use crate::special::{log_cosh, log_sum_exp, sigmoid};
use crate::{Error, Result};

/// The ordinal comparison law `G(φ, ψ, γ, K)` over `Υ(K) = {−K..−1, 1..K}`.
///
/// `P(Y = k) ∝ exp(φ(sign(k)γ) + ψ(|k|))`. The normalizer factors as
/// `2 cosh(φ(γ)) Σ e^{ψ}`, so the sign of `Y` and its magnitude are
/// independent with `P(Y > 0) = σ(2φ(γ))` and `|Y| ~ pattern`.
#[derive(Clone, Debug)]
pub struct OrdinalModel {
    link: StrengthLink,
    pattern: PatternDistribution,
}

/// Mean, variance and SNR of a single comparison outcome.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeMoments {
    pub mean: f64,
    pub variance: f64,
    /// `+inf` when the outcome is (numerically) deterministic.
    #[serde(with = "crate::model::float_or_inf")]
    pub snr: f64,
    pub snr_infinite: bool,
}

impl OrdinalModel {
    pub fn new(link: StrengthLink, pattern: PatternDistribution) -> Self {
        OrdinalModel { link, pattern }
    }

    pub fn link(&self) -> &StrengthLink {
        &self.link
    }

    pub fn pattern(&self) -> &PatternDistribution {
        &self.pattern
    }

    pub fn k(&self) -> usize {
        self.pattern.k()
    }

    /// φ(γ).
    pub fn phi(&self, gamma: f64) -> f64 {
        self.link.apply(gamma)
    }

    /// The same link with the binary pattern (K = 1): the law of `sign(Y)`.
    pub fn binarized(&self) -> OrdinalModel {
        OrdinalModel {
            link: self.link.clone(),
            pattern: PatternDistribution::uniform(1).expect("K=1 pattern"),
        }
    }

    fn check_outcome(&self, k: i32) -> Result<usize> {
        let m = k.unsigned_abs() as usize;
        if k == 0 || m > self.k() {
            return Err(Error::domain(format!(
                "outcome {k} outside Υ({}) = ±1..=±{}",
                self.k(),
                self.k()
            )));
        }
        Ok(m)
    }

    /// `log P(Y = k)` given φ(γ); written so that φ = ±∞ stays well defined.
    fn log_pmf_at_phi(&self, phi: f64, k: i32, magnitude: usize) -> f64 {
        let w = self.pattern.weight(magnitude);
        if w == 0.0 {
            return f64::NEG_INFINITY;
        }
        let a = phi.abs();
        let tail = (-2.0 * a).exp().ln_1p();
        let aligned = (k > 0) == (phi >= 0.0);
        if aligned {
            w.ln() - tail
        } else {
            w.ln() - 2.0 * a - tail
        }
    }

    pub fn log_pmf(&self, gamma: f64, k: i32) -> Result<f64> {
        let m = self.check_outcome(k)?;
        Ok(self.log_pmf_at_phi(self.phi(gamma), k, m))
    }

    /// `P(Y = k)`; `k` must lie in `Υ(K)`.
    pub fn pmf(&self, gamma: f64, k: i32) -> Result<f64> {
        self.log_pmf(gamma, k).map(f64::exp)
    }

    /// Outcomes `−K..−1, 1..K` in order with their probabilities.
    pub fn pmf_table(&self, gamma: f64) -> Vec<(i32, f64)> {
        let phi = self.phi(gamma);
        self.outcomes()
            .map(|k| {
                let m = k.unsigned_abs() as usize;
                (k, self.log_pmf_at_phi(phi, k, m).exp())
            })
            .collect()
    }

    /// `Υ(K)` in ascending order.
    pub fn outcomes(&self) -> impl Iterator<Item = i32> {
        let k = self.k() as i32;
        (-k..=k).filter(|&v| v != 0)
    }

    /// `P(Y > 0) = σ(2φ(γ))`, independent of the pattern.
    pub fn prob_positive(&self, gamma: f64) -> f64 {
        sigmoid(2.0 * self.phi(gamma))
    }

    pub fn moments(&self, gamma: f64) -> OutcomeMoments {
        let phi = self.phi(gamma);
        let t = phi.tanh();
        let ex = self.pattern.mean();
        let ex2 = self.pattern.second_moment();
        let mean = t * ex;
        let variance = (ex2 - mean * mean).max(0.0);
        let snr = if self.pattern.is_degenerate() {
            // 1/SNR(X) = 0 and the ratio simplifies to sinh²(φ).
            phi.sinh().powi(2)
        } else {
            let var_x = ex2 - ex * ex;
            let inv_snr_x = var_x / (ex * ex);
            let sech2 = 1.0 / phi.cosh().powi(2);
            t * t / (inv_snr_x + sech2)
        };
        let snr_infinite = !snr.is_finite();
        OutcomeMoments {
            mean,
            variance,
            snr: if snr_infinite { f64::INFINITY } else { snr },
            snr_infinite,
        }
    }

    /// `log E[e^{λY}] = log Σ_k w_k cosh(φ + λk) − log cosh φ`.
    pub fn log_mgf(&self, gamma: f64, lambda: f64) -> f64 {
        self.log_mgf_at_phi(self.phi(gamma), lambda)
    }

    pub(crate) fn log_mgf_at_phi(&self, phi: f64, lambda: f64) -> f64 {
        let numer = log_sum_exp(
            self.pattern
                .support()
                .map(|(m, w)| w.ln() + log_cosh(phi + lambda * m as f64)),
        );
        numer - log_cosh(phi)
    }

    /// Inverse-CDF sampler for a fixed γ; reuse it for repeated draws.
    pub fn sampler(&self, gamma: f64) -> OutcomeSampler {
        OutcomeSampler::new(&self.pmf_table(gamma))
    }

    /// `count` i.i.d. draws at γ.
    pub fn sample<R: Rng + ?Sized>(&self, gamma: f64, rng: &mut R, count: usize) -> Vec<i32> {
        let sampler = self.sampler(gamma);
        (0..count).map(|_| sampler.draw(rng)).collect()
    }
}

/// Cumulative table over the 2K outcomes.
#[derive(Clone, Debug)]
pub struct OutcomeSampler {
    outcomes: Vec<i32>,
    cumulative: Vec<f64>,
}

impl OutcomeSampler {
    fn new(table: &[(i32, f64)]) -> Self {
        let mut acc = 0.0;
        let mut outcomes = Vec::with_capacity(table.len());
        let mut cumulative = Vec::with_capacity(table.len());
        for &(k, p) in table {
            acc += p;
            outcomes.push(k);
            cumulative.push(acc);
        }
        // Close the table against rounding so every u in [0, 1) lands on a
        // positive-probability outcome.
        if let Some(last) = table.iter().rposition(|(_, p)| *p > 0.0) {
            for c in &mut cumulative[last..] {
                *c = f64::INFINITY;
            }
        }
        OutcomeSampler {
            outcomes,
            cumulative,
        }
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> i32 {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.outcomes[idx]
    }
}

/// Elementwise sign of ordinal outcomes.
pub fn binarize(outcomes: &[i32]) -> Result<Vec<i8>> {
    outcomes
        .iter()
        .enumerate()
        .map(|(i, &y)| match y.signum() {
            0 => Err(Error::CorruptData(format!("zero outcome at position {i}"))),
            s => Ok(s as i8),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BaseCdf;
    use crate::seed::rng_for;
    use approx::assert_abs_diff_eq;

    fn identity_uniform(k: usize) -> OrdinalModel {
        OrdinalModel::new(StrengthLink::identity(), PatternDistribution::uniform(k).unwrap())
    }

    // Direct evaluation of exp(g) / Σ exp(g) over the 2K outcomes.
    fn brute_pmf(model: &OrdinalModel, gamma: f64) -> Vec<(i32, f64)> {
        let g = |k: i32| {
            let w = model.pattern().weight(k.unsigned_abs() as usize);
            model.phi(k.signum() as f64 * gamma).exp() * w
        };
        let z: f64 = model.outcomes().map(g).sum();
        model.outcomes().map(|k| (k, g(k) / z)).collect()
    }

    #[test]
    fn pmf_examples() {
        let m = identity_uniform(1);
        assert_abs_diff_eq!(m.pmf(0.0, 1).unwrap(), 0.5, epsilon = 1e-15);
        let e2 = 2f64.exp();
        assert_abs_diff_eq!(m.pmf(1.0, 1).unwrap(), e2 / (e2 + 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(m.pmf(1.0, 1).unwrap(), 0.8807970779778823, epsilon = 1e-15);
    }

    #[test]
    fn pmf_matches_brute_force_and_normalizes() {
        let m = OrdinalModel::new(
            StrengthLink::tanh_sigmoid(),
            PatternDistribution::abs_decay(5, 0.3).unwrap(),
        );
        for &g in &[-1.2, -0.1, 0.0, 0.4, 2.0] {
            let table = m.pmf_table(g);
            let brute = brute_pmf(&m, g);
            for ((k, p), (_, q)) in table.iter().zip(&brute) {
                assert_abs_diff_eq!(*p, *q, epsilon = 1e-14);
                assert_eq!(*p, m.pmf(g, *k).unwrap());
            }
            let total: f64 = table.iter().map(|(_, p)| p).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pmf_domain() {
        let m = identity_uniform(3);
        assert!(m.pmf(0.2, 0).is_err());
        assert!(m.pmf(0.2, 4).is_err());
        assert!(m.pmf(0.2, -4).is_err());
    }

    #[test]
    fn cubic_overflow_is_handled() {
        let m = OrdinalModel::new(StrengthLink::cubic(), PatternDistribution::uniform(2).unwrap());
        let t = m.pmf_table(1e120);
        assert_abs_diff_eq!(t[2].1 + t[3].1, 1.0, epsilon = 1e-15);
        assert_eq!(t[0].1, 0.0);
        assert!(m.moments(1e120).snr.is_finite());
        let binary = m.binarized();
        assert!(binary.moments(1e120).snr_infinite);
    }

    #[test]
    fn prob_positive_examples() {
        let half = StrengthLink::btl();
        let m = OrdinalModel::new(half, PatternDistribution::uniform(3).unwrap());
        let e = 1f64.exp();
        assert_abs_diff_eq!(m.prob_positive(1.0), e / (1.0 + e), epsilon = 1e-15);
        assert_eq!(m.prob_positive(0.0), 0.5);
        let tm = OrdinalModel::new(
            StrengthLink::logit_of_cdf(BaseCdf::StandardNormal).with_scale(0.5).unwrap(),
            PatternDistribution::uniform(1).unwrap(),
        );
        assert_abs_diff_eq!(tm.prob_positive(0.3), 0.6179114221889527, epsilon = 1e-12);
    }

    #[test]
    fn moments_examples() {
        let m = identity_uniform(1);
        let mo = m.moments(0.0);
        assert_eq!(mo.mean, 0.0);
        assert_eq!(mo.snr, 0.0);
        assert_abs_diff_eq!(m.moments(0.5).snr, 0.5f64.sinh().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(m.moments(0.5).snr, 0.27154031740762189, epsilon = 1e-15);

        let m2 = identity_uniform(2);
        let brute: f64 = brute_pmf(&m2, 1.0).iter().map(|(k, p)| *k as f64 * p).sum();
        assert_abs_diff_eq!(m2.moments(1.0).mean, brute, epsilon = 1e-14);
        assert_abs_diff_eq!(m2.moments(1.0).mean, 1.1423912339336473, epsilon = 1e-14);
    }

    #[test]
    fn log_mgf_examples() {
        let m = OrdinalModel::new(StrengthLink::identity(), PatternDistribution::uniform(2).unwrap());
        assert_abs_diff_eq!(m.log_mgf(0.5, 0.0), 0.0, epsilon = 1e-15);
        let brute: f64 = brute_pmf(&m, 0.5)
            .iter()
            .map(|(k, p)| p * (0.1 * *k as f64).exp())
            .sum::<f64>()
            .ln();
        assert_abs_diff_eq!(m.log_mgf(0.5, 0.1), brute, epsilon = 1e-14);

        let k1 = identity_uniform(1);
        let phi = k1.phi(0.7);
        assert_abs_diff_eq!(k1.log_mgf(0.7, -phi), -(phi.cosh().ln()), epsilon = 1e-15);
    }

    #[test]
    fn sampling_contract() {
        let m = OrdinalModel::new(
            StrengthLink::identity(),
            PatternDistribution::abs_decay(4, 0.1).unwrap(),
        );
        let mut rng = rng_for(1, &[]);
        assert!(m.sample(0.5, &mut rng, 0).is_empty());
        let a = m.sample(0.5, &mut rng_for(3, &[]), 100);
        let b = m.sample(0.5, &mut rng_for(3, &[]), 100);
        assert_eq!(a, b);
        assert!(a.iter().all(|y| *y != 0 && y.abs() <= 4));
    }

    #[test]
    fn zero_weight_outcomes_never_sampled() {
        let m = OrdinalModel::new(
            StrengthLink::identity(),
            PatternDistribution::from_weights(vec![0.8, 0.0, 0.0, 0.2]).unwrap(),
        );
        let draws = m.sample(0.3, &mut rng_for(9, &[]), 20_000);
        assert!(draws.iter().all(|y| matches!(y.abs(), 1 | 4)));
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize(&[3, -1, 2]).unwrap(), vec![1, -1, 1]);
        assert_eq!(binarize(&[1, 2, 3]).unwrap(), vec![1, 1, 1]);
        assert!(matches!(binarize(&[1, 0]), Err(Error::CorruptData(_))));
    }
}
