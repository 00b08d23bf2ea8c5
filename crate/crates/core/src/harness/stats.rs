//! Estimators, normal-quantile intervals and small trend statistics.

use serde::{Deserialize, Serialize};

/// A point estimate with its standard error and a symmetric normal interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub reps: u64,
}

impl Estimate {
    pub fn new(estimate: f64, se: f64, z: f64, reps: u64) -> Self {
        Estimate {
            estimate,
            se,
            ci_lo: estimate - z * se,
            ci_hi: estimate + z * se,
            reps,
        }
    }

    /// A closed-form value: zero standard error.
    pub fn exact(value: f64) -> Self {
        Estimate::new(value, 0.0, 0.0, 0)
    }

    /// Placeholder for an undefined quantity.
    pub fn undefined(reps: u64) -> Self {
        Estimate::new(f64::NAN, f64::NAN, 0.0, reps)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_hi - self.ci_lo)
    }

    pub fn is_defined(&self) -> bool {
        self.estimate.is_finite()
    }
}

/// Proportion with `se = sqrt(p̂(1 − p̂)/R)`.
pub fn bernoulli(successes: u64, reps: u64, z: f64) -> Estimate {
    let p = successes as f64 / reps as f64;
    Estimate::new(p, (p * (1.0 - p) / reps as f64).sqrt(), z, reps)
}

/// Sample mean with `se = sd/√R`; summation runs in slice order.
pub fn sample_mean(values: &[f64], z: f64) -> Estimate {
    let r = values.len();
    let mean = values.iter().sum::<f64>() / r as f64;
    let se = if r > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (r - 1) as f64 / r as f64).sqrt()
    } else {
        0.0
    };
    Estimate::new(mean, se, z, r as u64)
}

/// `mean(num)/mean(den)` over paired replications, delta-method SE.
/// `None` when the denominator mean is 0.
pub fn ratio_of_means(num: &[f64], den: &[f64], z: f64) -> Option<Estimate> {
    let r = num.len();
    let mn = num.iter().sum::<f64>() / r as f64;
    let md = den.iter().sum::<f64>() / r as f64;
    if md == 0.0 {
        return None;
    }
    let ratio = mn / md;
    let se = if r > 1 {
        let denom = (r - 1) as f64;
        let vn = num.iter().map(|v| (v - mn).powi(2)).sum::<f64>() / denom;
        let vd = den.iter().map(|v| (v - md).powi(2)).sum::<f64>() / denom;
        let cov = num
            .iter()
            .zip(den)
            .map(|(a, b)| (a - mn) * (b - md))
            .sum::<f64>()
            / denom;
        let var = (vn + ratio * ratio * vd - 2.0 * ratio * cov) / (md * md * r as f64);
        var.max(0.0).sqrt()
    } else {
        0.0
    };
    Some(Estimate::new(ratio, se, z, r as u64))
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start;
        while end + 1 < idx.len() && x[idx[end + 1]] == x[idx[start]] {
            end += 1;
        }
        let avg = (start + end) as f64 / 2.0 + 1.0;
        for &i in &idx[start..=end] {
            out[i] = avg;
        }
        start = end + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation; NaN if either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    pearson(&ranks(x), &ranks(y))
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "ols_slope needs paired samples");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
