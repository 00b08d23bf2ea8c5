use std::str::FromStr;

use crate::special::log_sum_exp;
use crate::{Error, Result};

/// Law of the outcome magnitude `X` on `{1, …, K}`, stored as normalized
/// weights so that `ψ(k) = −∞` is simply weight 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternDistribution {
    weights: Vec<f64>,
}

impl PatternDistribution {
    /// Normalizes non-negative weights. At least one must be positive.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPattern("K must be at least 1".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidPattern(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidPattern("all weights are zero".into()));
        }
        Ok(PatternDistribution {
            weights: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub(crate) fn from_normalized_unchecked(weights: Vec<f64>) -> Self {
        PatternDistribution { weights }
    }

    /// Softmax of ψ(1..K) in log-space. `-inf` entries get weight 0.
    pub fn from_psi(psi: &[f64]) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::InvalidPattern("K must be at least 1".into()));
        }
        if psi.iter().any(|p| p.is_nan() || *p == f64::INFINITY) {
            return Err(Error::InvalidPattern("ψ values must be finite or -inf".into()));
        }
        let max = psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::InvalidPattern("every ψ(k) is -inf".into()));
        }
        let shifted: Vec<f64> = psi.iter().map(|p| p - max).collect();
        let log_norm = log_sum_exp(shifted.iter().copied());
        Ok(PatternDistribution {
            weights: shifted.iter().map(|s| (s - log_norm).exp()).collect(),
        })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::from_weights(vec![1.0; k])
    }

    /// ψ(k) = −β|k|.
    pub fn abs_decay(k: usize, beta: f64) -> Result<Self> {
        Self::from_psi(&(1..=k).map(|m| -beta * m as f64).collect::<Vec<_>>())
    }

    /// ψ(k) = −βk².
    pub fn square_decay(k: usize, beta: f64) -> Result<Self> {
        Self::from_psi(&(1..=k).map(|m| -beta * (m * m) as f64).collect::<Vec<_>>())
    }

    /// All mass on one magnitude.
    pub fn degenerate(k: usize, at: usize) -> Result<Self> {
        if at == 0 || at > k {
            return Err(Error::InvalidPattern(format!("support point {at} outside 1..={k}")));
        }
        let mut w = vec![0.0; k];
        w[at - 1] = 1.0;
        Self::from_weights(w)
    }

    /// Number of magnitude levels.
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// P(X = m) for m in 1..=K.
    pub fn weight(&self, magnitude: usize) -> f64 {
        self.weights[magnitude - 1]
    }

    /// Iterator of (magnitude, weight) over the support.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| (i + 1, *w))
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(m, w)| m as f64 * w).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.support().map(|(m, w)| (m * m) as f64 * w).sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.support().count() == 1
    }

    /// Weights are non-increasing in the magnitude.
    pub fn is_non_increasing(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] >= w[1])
    }
}

/// A pattern recipe from the CLI mini-language, resolved against K later.
///
/// `abs:<β>`, `sq:<β>`, `uniform`, `weights:w1,…,wK`, `min-unconstrained`,
/// `min-monotone`; any of them may carry a trailing `,K=<n>`.
#[derive(Clone, Debug, PartialEq)]
pub enum PatternSpec {
    Abs(f64),
    Square(f64),
    Uniform,
    Weights(Vec<f64>),
    MinUnconstrained,
    MinMonotone,
}

impl PatternSpec {
    /// Parses a spec, also returning an embedded `K=` if present.
    pub fn parse_with_k(s: &str) -> Result<(Self, Option<usize>)> {
        let s = s.trim();
        let mut k = None;
        let mut body = s;
        if let Some(pos) = s.rfind(",K=") {
            let kv = &s[pos + 3..];
            k = Some(
                kv.trim()
                    .parse()
                    .map_err(|_| Error::InvalidPattern(format!("bad K in {s:?}")))?,
            );
            body = &s[..pos];
        }
        let beta = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|b| b.is_finite())
                .ok_or_else(|| Error::InvalidPattern(format!("bad β in {s:?}")))
        };
        let spec = match body.split_once(':') {
            Some(("abs", v)) => PatternSpec::Abs(beta(v)?),
            Some(("sq", v)) => PatternSpec::Square(beta(v)?),
            Some(("weights", v)) => PatternSpec::Weights(
                v.split(',')
                    .map(|w| {
                        w.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidPattern(format!("bad weight {w:?}")))
                    })
                    .collect::<Result<_>>()?,
            ),
            None if body == "uniform" => PatternSpec::Uniform,
            None if body == "min-unconstrained" => PatternSpec::MinUnconstrained,
            None if body == "min-monotone" => PatternSpec::MinMonotone,
            _ => return Err(Error::InvalidPattern(format!("unknown pattern spec {s:?}"))),
        };
        if let (PatternSpec::Weights(w), Some(k)) = (&spec, k) {
            if w.len() != k {
                return Err(Error::InvalidPattern(format!(
                    "{} weights given but K={k}",
                    w.len()
                )));
            }
        }
        Ok((spec, k))
    }

    /// Materializes the pattern at a given K.
    pub fn build(&self, k: usize) -> Result<PatternDistribution> {
        match self {
            PatternSpec::Abs(b) => PatternDistribution::abs_decay(k, *b),
            PatternSpec::Square(b) => PatternDistribution::square_decay(k, *b),
            PatternSpec::Uniform => PatternDistribution::uniform(k),
            PatternSpec::Weights(w) => {
                if w.len() != k {
                    return Err(Error::InvalidPattern(format!(
                        "{} weights given but K={k}",
                        w.len()
                    )));
                }
                PatternDistribution::from_weights(w.clone())
            }
            PatternSpec::MinUnconstrained => {
                crate::pattern_analysis::minimal_snr_unconstrained(k).map(|m| m.pattern)
            }
            PatternSpec::MinMonotone => {
                crate::pattern_analysis::minimal_snr_monotone(k).map(|m| m.pattern)
            }
        }
    }

    /// Same family with a different β; `None` for families without β.
    pub fn with_beta(&self, beta: f64) -> Option<Self> {
        match self {
            PatternSpec::Abs(_) => Some(PatternSpec::Abs(beta)),
            PatternSpec::Square(_) => Some(PatternSpec::Square(beta)),
            _ => None,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            PatternSpec::Abs(b) | PatternSpec::Square(b) => Some(*b),
            _ => None,
        }
    }

    /// Canonical text form (without `K=`).
    pub fn label(&self) -> String {
        match self {
            PatternSpec::Abs(b) => format!("abs:{b}"),
            PatternSpec::Square(b) => format!("sq:{b}"),
            PatternSpec::Uniform => "uniform".into(),
            PatternSpec::Weights(w) => format!(
                "weights:{}",
                w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
            PatternSpec::MinUnconstrained => "min-unconstrained".into(),
            PatternSpec::MinMonotone => "min-monotone".into(),
        }
    }
}

impl FromStr for PatternSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_k(s).map(|(spec, _)| spec)
    }
}
