use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{OrdinalModel, PatternSpec, StrengthLink};
use crate::ranking::PreferenceVector;
use crate::{Error, Result};

/// Replications per grid point for the two-item runs, desk and paper scale.
pub const TWO_ITEM_REPS: u64 = 100_000;
pub const TWO_ITEM_REPS_PAPER: u64 = 1_000_000;
/// Replications for the Kendall-tau scenarios (the same at both scales).
pub const TAU_REPS: u64 = 1_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// P(A > 0) and P(B > 0) for two items.
    TwoItem,
    /// Expected Kendall tau of ordinal and binary counting over L.
    Scenario1,
    /// Tau gap and SNR(X) over a β grid at fixed L.
    Scenario2,
    /// Ratio of binary to ordinal tau over L.
    Scenario3,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::TwoItem => "two_item",
            Scenario::Scenario1 => "scenario1",
            Scenario::Scenario2 => "scenario2",
            Scenario::Scenario3 => "scenario3",
        }
    }

    fn default_rounds(self) -> Vec<usize> {
        match self {
            Scenario::TwoItem => (1..=10).map(|i| 50 * i).collect(),
            Scenario::Scenario1 => (1..=9).map(|i| 50 + 50 * i).collect(),
            Scenario::Scenario2 => vec![100],
            Scenario::Scenario3 => (1..=10).map(|i| 100 * i).collect(),
        }
    }

    fn default_reps(self) -> u64 {
        match self {
            Scenario::TwoItem => TWO_ITEM_REPS,
            _ => TAU_REPS,
        }
    }
}

/// Item strengths for the n-item scenarios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaSpec {
    /// Centered, item 0 strongest, neighbours `w` apart.
    EquallySpaced(f64),
    Explicit(Vec<f64>),
}

/// One experiment, as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Link in the CLI mini-language, e.g. `identity` or `logitnorm:0.5`.
    pub link: String,
    /// Pattern in the CLI mini-language, e.g. `abs:0.1`.
    pub pattern: String,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Overrides the pattern's β (two-item and scenario 2 sweeps).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    /// Two-item strength gaps θ₁ − θ₂.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSpec>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    /// Add closed-form large-L predictions as extra rows.
    #[serde(default = "default_true")]
    pub include_limits: bool,
}

fn default_ci_level() -> f64 {
    0.99
}

fn default_true() -> bool {
    true
}

/// A validated config with every default filled in.
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    pub scenario: Scenario,
    pub link: StrengthLink,
    pub pattern: PatternSpec,
    pub k: usize,
    pub betas: Vec<Option<f64>>,
    pub gammas: Vec<f64>,
    pub theta: Option<(PreferenceVector, Option<f64>)>,
    pub rounds: Vec<usize>,
    pub reps: u64,
    pub seed: u64,
    pub ci_level: f64,
    pub include_limits: bool,
}

impl ResolvedConfig {
    /// The model at one β of the sweep.
    pub fn model(&self, beta: Option<f64>) -> Result<OrdinalModel> {
        let spec = match beta {
            Some(b) => self.pattern.with_beta(b).ok_or_else(|| {
                Error::Config(format!("pattern {} has no β to sweep", self.pattern.label()))
            })?,
            None => self.pattern.clone(),
        };
        Ok(OrdinalModel::new(self.link.clone(), spec.build(self.k)?))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::from_json(&text)
    }

    /// Restores the replication counts of the original study.
    pub fn paper_scale(mut self) -> Self {
        self.reps = Some(match self.scenario {
            Scenario::TwoItem => TWO_ITEM_REPS_PAPER,
            _ => TAU_REPS,
        });
        self
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let cfg = |m: String| Error::Config(m);
        let link: StrengthLink = self.link.parse().map_err(|e: Error| cfg(e.to_string()))?;
        let (pattern, embedded_k) =
            PatternSpec::parse_with_k(&self.pattern).map_err(|e| cfg(e.to_string()))?;
        let k = match (self.k, embedded_k) {
            (Some(a), Some(b)) if a != b => {
                return Err(cfg(format!("K = {a} conflicts with pattern K = {b}")))
            }
            (Some(k), _) | (None, Some(k)) => k,
            (None, None) => match &pattern {
                PatternSpec::Weights(w) => w.len(),
                _ => return Err(cfg("K is required".into())),
            },
        };
        if k == 0 {
            return Err(cfg("K must be at least 1".into()));
        }

        let betas = match &self.betas {
            Some(b) if b.is_empty() => return Err(cfg("betas must not be empty".into())),
            Some(b) => {
                if pattern.beta().is_none() {
                    return Err(cfg(format!("pattern {} has no β to sweep", pattern.label())));
                }
                b.iter().map(|v| Some(*v)).collect()
            }
            None => vec![None],
        };

        let rounds = self
            .rounds
            .clone()
            .unwrap_or_else(|| self.scenario.default_rounds());
        if rounds.is_empty() || rounds[0] == 0 || rounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(cfg("L grid must be non-empty, positive and strictly increasing".into()));
        }
        let reps = self.reps.unwrap_or_else(|| self.scenario.default_reps());
        if reps == 0 {
            return Err(cfg("reps must be at least 1".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(cfg(format!("ci_level must lie in (0, 1), got {}", self.ci_level)));
        }

        let (gammas, theta) = match self.scenario {
            Scenario::TwoItem => {
                let g = self
                    .gammas
                    .clone()
                    .ok_or_else(|| cfg("two_item needs `gammas`".into()))?;
                if g.is_empty() || g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(cfg("two_item gammas must be positive".into()));
                }
                (g, None)
            }
            _ => {
                let spec = self
                    .theta
                    .clone()
                    .ok_or_else(|| cfg(format!("{} needs `theta`", self.scenario.label())))?;
                let theta = match spec {
                    ThetaSpec::EquallySpaced(w) => {
                        let n = self
                            .n
                            .ok_or_else(|| cfg("equally spaced θ needs `n`".into()))?;
                        (PreferenceVector::equally_spaced(n, w).map_err(|e| cfg(e.to_string()))?, Some(w))
                    }
                    ThetaSpec::Explicit(v) => {
                        if self.n.is_some_and(|n| n != v.len()) {
                            return Err(cfg("n disagrees with the explicit θ length".into()));
                        }
                        (PreferenceVector::new(v).map_err(|e| cfg(e.to_string()))?, None)
                    }
                };
                if theta.0.n() < 2 {
                    return Err(cfg("tau scenarios need at least two items".into()));
                }
                (Vec::new(), Some(theta))
            }
        };

        Ok(ResolvedConfig {
            scenario: self.scenario,
            link,
            pattern,
            k,
            betas,
            gammas,
            theta,
            rounds,
            reps,
            seed: self.seed,
            ci_level: self.ci_level,
            include_limits: self.include_limits,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(
            r#"{"scenario":"scenario1","link":"identity","pattern":"abs:0.9","K":4,
                "n":10,"theta":{"equally_spaced":0.05}}"#,
        )
        .unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.rounds, (100..=500).step_by(50).collect::<Vec<_>>());
        assert_eq!(r.reps, TAU_REPS);
        assert_eq!(r.ci_level, 0.99);
        assert_eq!(r.theta.as_ref().unwrap().0.n(), 10);
    }

    #[test]
    fn validation_errors() {
        let bad = [
            r#"{"scenario":"two_item","link":"identity","pattern":"abs:0.1","K":4,"gammas":[0.0]}"#,
            r#"{"scenario":"two_item","link":"identity","pattern":"abs:0.1","K":4}"#,
            r#"{"scenario":"two_item","link":"identity","pattern":"abs:0.1","gammas":[1]}"#,
            r#"{"scenario":"two_item","link":"identity","pattern":"abs:0.1","K":4,"gammas":[1],"L":[10,5]}"#,
            r#"{"scenario":"two_item","link":"identity","pattern":"abs:0.1","K":4,"gammas":[1],"reps":0}"#,
            r#"{"scenario":"two_item","link":"identity","pattern":"uniform","K":4,"gammas":[1],"betas":[0.1]}"#,
            r#"{"scenario":"scenario1","link":"identity","pattern":"abs:0.1","K":4}"#,
            r#"{"scenario":"scenario1","link":"nope","pattern":"abs:0.1","K":4,"n":3,"theta":{"equally_spaced":0.1}}"#,
            r#"{"scenario":"scenario1","link":"identity","pattern":"abs:0.1,K=3","K":4,"n":3,"theta":{"equally_spaced":0.1}}"#,
            r#"{"scenario":"scenario1","link":"identity","pattern":"abs:0.1","K":4,"n":3,"theta":{"equally_spaced":0.1},"ci_level":1}"#,
        ];
        for b in bad {
            assert!(
                ExperimentConfig::from_json(b).and_then(|c| c.resolve()).is_err(),
                "{b}"
            );
        }
        assert!(ExperimentConfig::from_json(r#"{"scenario":"two_item","bogus":1}"#).is_err());
    }

    #[test]
    fn paper_scale_reps() {
        let c = ExperimentConfig::from_json(
            r#"{"scenario":"two_item","link":"identity","pattern":"abs:0.1","K":4,"gammas":[0.15],"reps":10}"#,
        )
        .unwrap();
        assert_eq!(c.paper_scale().resolve().unwrap().reps, TWO_ITEM_REPS_PAPER);
    }
}
