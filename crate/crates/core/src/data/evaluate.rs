use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PairComparisons;
use crate::seed::rng_for;
use crate::special::student_t_two_sided_p;
use crate::{Error, Result};

pub const DEFAULT_MIN_PAIR_COUNT: usize = 10;

/// Unit over which the paired t-test pairs the two accuracies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Mean accuracy over pairs, one sample per repetition.
    #[default]
    ByRepetition,
    /// Mean accuracy over repetitions, one sample per item pair.
    ByPair,
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "by-repetition" | "repetition" => Ok(Pairing::ByRepetition),
            "by-pair" | "pair" => Ok(Pairing::ByPair),
            other => Err(Error::Config(format!("unknown pairing {other:?}"))),
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::ByRepetition => "by-repetition",
            Pairing::ByPair => "by-pair",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationOptions {
    pub train_frac: f64,
    pub repetitions: usize,
    pub min_pair_count: usize,
    pub seed: u64,
    #[serde(default)]
    pub pairing: Pairing,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        EvaluationOptions {
            train_frac: 0.7,
            repetitions: 100,
            min_pair_count: DEFAULT_MIN_PAIR_COUNT,
            seed: 7,
            pairing: Pairing::ByRepetition,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    #[serde(with = "crate::model::float_or_inf")]
    pub t: f64,
    /// Two-sided; `None` when the test is degenerate.
    pub p: Option<f64>,
    pub df: usize,
    pub mean_diff: f64,
    /// The paired differences have zero variance.
    pub degenerate: bool,
}

/// `t = mean(d) / (sd(d)/√n)` with `d = a − b`, two-sided p on n − 1 df.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::domain("paired t-test needs two equal samples of size ≥ 2"));
    }
    let n = a.len();
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;
    if var == 0.0 {
        let t = if mean == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(mean)
        };
        return Ok(TTest {
            t,
            p: None,
            df,
            mean_diff: mean,
            degenerate: true,
        });
    }
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    Ok(TTest {
        t,
        p: Some(student_t_two_sided_p(t, df as f64)),
        df,
        mean_diff: mean,
        degenerate: false,
    })
}

/// Accuracies `(ordinal, binary)` of one split.
///
/// Each method predicts the sign of its training aggregate (sum of
/// differences, or sum of their signs); accuracy is the share of test
/// differences with that sign. A zero aggregate abstains and scores ½.
pub fn score_split(train: &[f64], test: &[f64]) -> (f64, f64) {
    let sum: f64 = train.iter().sum();
    let signs: f64 = train.iter().map(|d| d.signum()).sum();
    let accuracy = |aggregate: f64| {
        if aggregate == 0.0 {
            return 0.5;
        }
        let hits = test.iter().filter(|d| d.signum() == aggregate.signum()).count();
        hits as f64 / test.len() as f64
    };
    (accuracy(sum), accuracy(signs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub item_i: u64,
    pub item_j: u64,
    pub comparisons: usize,
    pub ordinal_accuracy: f64,
    pub binary_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub options: EvaluationOptions,
    pub eligible_pairs: usize,
    pub mean_ordinal_accuracy: f64,
    pub mean_binary_accuracy: f64,
    /// Binary minus ordinal, paired per `options.pairing`.
    pub t_test: TTest,
    /// Mean over pairs, per repetition.
    pub repetition_ordinal: Vec<f64>,
    pub repetition_binary: Vec<f64>,
    /// Mean over repetitions, per pair.
    pub pairs: Vec<PairSummary>,
}

fn train_size(total: usize, frac: f64) -> usize {
    ((total as f64 * frac).round() as usize).clamp(1, total - 1)
}

/// Repeated random train/test splits of every eligible pair.
pub fn evaluate_pair_protocol(pairs: &PairComparisons, opts: &EvaluationOptions) -> Result<EvaluationReport> {
    if !(opts.train_frac > 0.0 && opts.train_frac < 1.0) {
        return Err(Error::domain(format!("train_frac must lie in (0, 1), got {}", opts.train_frac)));
    }
    if opts.repetitions == 0 {
        return Err(Error::domain("at least one repetition is needed"));
    }
    let min_count = opts.min_pair_count.max(2);
    let eligible: Vec<(u64, u64, &[f64])> = pairs
        .iter()
        .filter(|(_, d)| d.len() >= min_count)
        .map(|(&(i, j), d)| (i, j, d.as_slice()))
        .collect();
    if eligible.is_empty() {
        return Err(Error::CorruptData(format!(
            "no item pair has at least {min_count} comparisons"
        )));
    }

    // accuracies[rep][pair] = (ordinal, binary)
    let accuracies: Vec<Vec<(f64, f64)>> = (0..opts.repetitions as u64)
        .map(|rep| {
            eligible
                .par_iter()
                .enumerate()
                .map(|(p, (_, _, diffs))| {
                    let mut rng = rng_for(opts.seed, &[rep, p as u64]);
                    let mut shuffled = diffs.to_vec();
                    shuffled.shuffle(&mut rng);
                    let cut = train_size(shuffled.len(), opts.train_frac);
                    score_split(&shuffled[..cut], &shuffled[cut..])
                })
                .collect()
        })
        .collect();

    let npairs = eligible.len() as f64;
    let reps = opts.repetitions as f64;
    let repetition_ordinal: Vec<f64> = accuracies
        .iter()
        .map(|r| r.iter().map(|a| a.0).sum::<f64>() / npairs)
        .collect();
    let repetition_binary: Vec<f64> = accuracies
        .iter()
        .map(|r| r.iter().map(|a| a.1).sum::<f64>() / npairs)
        .collect();
    let summaries: Vec<PairSummary> = eligible
        .iter()
        .enumerate()
        .map(|(p, &(i, j, diffs))| PairSummary {
            item_i: i,
            item_j: j,
            comparisons: diffs.len(),
            ordinal_accuracy: accuracies.iter().map(|r| r[p].0).sum::<f64>() / reps,
            binary_accuracy: accuracies.iter().map(|r| r[p].1).sum::<f64>() / reps,
        })
        .collect();

    let t_test = match opts.pairing {
        Pairing::ByRepetition => paired_t_test(&repetition_binary, &repetition_ordinal)?,
        Pairing::ByPair => {
            let b: Vec<f64> = summaries.iter().map(|s| s.binary_accuracy).collect();
            let o: Vec<f64> = summaries.iter().map(|s| s.ordinal_accuracy).collect();
            paired_t_test(&b, &o)?
        }
    };

    Ok(EvaluationReport {
        options: *opts,
        eligible_pairs: eligible.len(),
        mean_ordinal_accuracy: repetition_ordinal.iter().sum::<f64>() / reps,
        mean_binary_accuracy: repetition_binary.iter().sum::<f64>() / reps,
        t_test,
        repetition_ordinal,
        repetition_binary,
        pairs: summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn t_test_examples() {
        let same = paired_t_test(&[0.3, 0.4], &[0.3, 0.4]).unwrap();
        assert!(same.degenerate && same.t == 0.0 && same.p.is_none());

        let r = paired_t_test(&[1.0, -1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_abs_diff_eq!(r.p.unwrap(), 1.0, epsilon = 1e-15);

        let r = paired_t_test(&[0.1, 0.2, 0.3], &[0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(r.t, 3.4641016151377544, epsilon = 1e-12);
        // Two degrees of freedom: p = 1 − t/√(2 + t²) = 1 − √(12/14).
        assert_abs_diff_eq!(r.p.unwrap(), 1.0 - (12.0f64 / 14.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.p.unwrap(), 0.0742, epsilon = 1e-4);

        let shifted = paired_t_test(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert!(shifted.degenerate && shifted.t == f64::INFINITY);
        assert!(paired_t_test(&[1.0], &[0.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[0.0]).is_err());
    }

    #[test]
    fn split_scoring() {
        assert_eq!(score_split(&[1.0, 2.0, 3.0], &[1.0, 4.0]), (1.0, 1.0));
        // One large negative outlier flips the sum but not the sign count.
        assert_eq!(score_split(&[1.0, 1.0, 1.0, -4.0], &[1.0, 1.0]), (0.0, 1.0));
        // Zero aggregates abstain.
        assert_eq!(score_split(&[1.0, -1.0], &[1.0, 1.0, -1.0]), (0.5, 0.5));
    }

    fn fixture() -> PairComparisons {
        let mut p = PairComparisons::default();
        p.push(1, 2, &[1.0; 12]).unwrap();
        p.push(1, 3, &[2.0, -1.0, 1.0, 1.0, -3.0, 1.0, 1.0, 2.0, -1.0, 1.0, 1.0]).unwrap();
        p.push(2, 3, &[1.0, -1.0, 1.0]).unwrap();
        p
    }

    #[test]
    fn protocol_basics() {
        let opts = EvaluationOptions {
            repetitions: 20,
            ..Default::default()
        };
        let r = evaluate_pair_protocol(&fixture(), &opts).unwrap();
        assert_eq!(r.eligible_pairs, 2);
        assert_eq!(r.pairs[0].ordinal_accuracy, 1.0);
        assert_eq!(r.pairs[0].binary_accuracy, 1.0);
        for v in r.repetition_binary.iter().chain(&r.repetition_ordinal) {
            assert!((0.0..=1.0).contains(v));
        }
        assert_eq!(r, evaluate_pair_protocol(&fixture(), &opts).unwrap());

        let by_pair = EvaluationOptions {
            pairing: Pairing::ByPair,
            ..opts
        };
        assert_eq!(evaluate_pair_protocol(&fixture(), &by_pair).unwrap().t_test.df, 1);

        let strict = EvaluationOptions {
            min_pair_count: 100,
            ..opts
        };
        assert!(evaluate_pair_protocol(&fixture(), &strict).is_err());
        let bad = EvaluationOptions {
            train_frac: 1.0,
            ..opts
        };
        assert!(evaluate_pair_protocol(&fixture(), &bad).is_err());
    }

    proptest! {
        #[test]
        fn t_statistic_antisymmetric(a in prop::collection::vec(0.0f64..1.0, 2..30), shift in -0.5f64..0.5) {
            let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + shift * (i % 3) as f64).collect();
            let ab = paired_t_test(&a, &b).unwrap();
            let ba = paired_t_test(&b, &a).unwrap();
            prop_assert_eq!(ab.t, -ba.t);
        }

        #[test]
        fn negating_a_pair_keeps_accuracies(diffs in prop::collection::vec(prop_oneof![-3.0f64..-0.5, 0.5f64..3.0], 12..30), seed in any::<u64>()) {
            let mut pos = PairComparisons::default();
            pos.push(1, 2, &diffs).unwrap();
            let mut neg = PairComparisons::default();
            let flipped: Vec<f64> = diffs.iter().map(|d| -d).collect();
            neg.push(1, 2, &flipped).unwrap();
            let opts = EvaluationOptions { repetitions: 5, seed, ..Default::default() };
            let a = evaluate_pair_protocol(&pos, &opts).unwrap();
            let b = evaluate_pair_protocol(&neg, &opts).unwrap();
            prop_assert_eq!(a.repetition_ordinal, b.repetition_ordinal);
            prop_assert_eq!(a.repetition_binary, b.repetition_binary);
        }
    }
}
