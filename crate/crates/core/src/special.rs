//! Scalar numerics shared by the model, the predictors and the t-test.

use statrs::function::{beta, erf};

const LN_2: f64 = std::f64::consts::LN_2;

/// Beyond this the complementary error function underflows and the
/// asymptotic Mills-ratio series takes over.
const SF_ASYMPTOTIC_FROM: f64 = 37.0;

/// `log Σ exp(x_i)` with max subtraction; empty or all `-inf` input gives `-inf`.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `log cosh(x)` without overflow.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `log(2 cosh(x))` without overflow.
pub fn log_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// Logistic function `1 / (1 + e^{-z})`, stable for both signs.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Standard normal CDF Φ.
pub fn normal_cdf(x: f64) -> f64 {
    if x < 0.0 {
        normal_sf(-x)
    } else {
        1.0 - normal_sf(x)
    }
}

/// Upper tail `1 − Φ(x)`, accurate deep into the tail.
pub fn normal_sf(x: f64) -> f64 {
    if x < SF_ASYMPTOTIC_FROM {
        0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    } else {
        log_normal_sf(x).exp()
    }
}

/// `log(1 − Φ(x))`.
pub fn log_normal_sf(x: f64) -> f64 {
    if x < SF_ASYMPTOTIC_FROM {
        normal_sf(x).ln()
    } else {
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
        -0.5 * x2 - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + series.ln()
    }
}

/// Two-sided standard-normal quantile for a confidence level, e.g. 2.5758 at 0.99.
pub fn normal_two_sided_z(level: f64) -> f64 {
    std::f64::consts::SQRT_2 * erf::erf_inv(level)
}

/// Two-sided p-value of a Student-t statistic with `df` degrees of freedom,
/// `P(|T| ≥ |t|) = I_{df/(df+t²)}(df/2, 1/2)`.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    beta::beta_reg(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// Student-t CDF.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * student_t_two_sided_p(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}
