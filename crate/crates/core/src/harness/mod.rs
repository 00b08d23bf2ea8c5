//! Seeded Monte-Carlo experiments comparing ordinal and binarized counting.
//!
//! Each replication draws from its own generator, seeded from
//! `(seed, grid point, replication)`. Replications run in parallel on the
//! current rayon pool and are reduced in replication order, so the output is
//! identical for any thread count.

mod config;
pub mod stats;

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    ExperimentConfig, ResolvedConfig, Scenario, ThetaSpec, TAU_REPS, TWO_ITEM_REPS,
    TWO_ITEM_REPS_PAPER,
};
pub use stats::Estimate;

use crate::model::{OrdinalModel, OutcomeSampler};
use crate::pattern_analysis::snr_of_pattern;
use crate::ranking::{asymptotic_tau, asymptotic_two_item, misranked_pairs, PreferenceVector};
use crate::seed::rng_for;
use crate::special::normal_two_sided_z;
use crate::{Error, Result};

/// One CSV line: a metric at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub link: String,
    pub pattern: String,
    pub beta: Option<f64>,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub rounds: usize,
    pub gamma_or_w: Option<f64>,
    pub metric: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub reps: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    /// Wall-clock time; only filled in on request.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl ExperimentResult {
    pub fn rows_for<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.metric == metric)
    }

    pub fn find<'a>(&'a self, metric: &'a str, rounds: usize) -> Option<&'a ResultRow> {
        self.rows_for(metric).find(|r| r.rounds == rounds)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
        let mut r = csv::Reader::from_reader(input);
        Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
    }
}

/// Runs the configured scenario on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_timed(config, false)
}

pub fn run_experiment_timed(config: &ExperimentConfig, record_time: bool) -> Result<ExperimentResult> {
    let started = Instant::now();
    let resolved = config.resolve()?;
    let rows = match resolved.scenario {
        Scenario::TwoItem => run_two_item(&resolved)?,
        Scenario::Scenario1 => run_scenario1(&resolved)?,
        Scenario::Scenario2 => run_scenario2(&resolved)?,
        Scenario::Scenario3 => run_scenario3(&resolved)?,
    };
    Ok(ExperimentResult {
        config: config.clone(),
        rows,
        elapsed_seconds: record_time.then(|| started.elapsed().as_secs_f64()),
    })
}

struct RowContext<'a> {
    cfg: &'a ResolvedConfig,
    beta: Option<f64>,
    n: usize,
    gamma_or_w: Option<f64>,
}

impl RowContext<'_> {
    fn row(&self, rounds: usize, metric: &str, e: Estimate) -> ResultRow {
        let pattern = match self.beta {
            Some(b) => self.cfg.pattern.with_beta(b).map(|p| p.label()),
            None => None,
        }
        .unwrap_or_else(|| self.cfg.pattern.label());
        ResultRow {
            scenario: self.cfg.scenario.label().into(),
            link: self.cfg.link.label(),
            pattern,
            beta: self.beta.or(self.cfg.pattern.beta()),
            n: self.n,
            k: self.cfg.k,
            rounds,
            gamma_or_w: self.gamma_or_w,
            metric: metric.into(),
            estimate: e.estimate,
            se: e.se,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            reps: e.reps,
            seed: self.cfg.seed,
        }
    }
}

/// Outcome of one two-item replication: `(A > 0, B > 0)`.
fn two_item_replication(sampler: &OutcomeSampler, rounds: usize, seed: u64, coords: &[u64]) -> (bool, bool) {
    let mut rng = rng_for(seed, coords);
    let (mut sum, mut signs) = (0i64, 0i64);
    for _ in 0..rounds {
        let y = sampler.draw(&mut rng);
        sum += y as i64;
        signs += y.signum() as i64;
    }
    (sum > 0, signs > 0)
}

/// Estimates `P(A > 0)` and `P(B > 0)` per (β, γ, L).
pub fn run_two_item(cfg: &ResolvedConfig) -> Result<Vec<ResultRow>> {
    if cfg.scenario != Scenario::TwoItem {
        return Err(Error::Config("run_two_item needs scenario two_item".into()));
    }
    let z = normal_two_sided_z(cfg.ci_level);
    let mut rows = Vec::new();
    let mut grid_id = 0u64;
    for &beta in &cfg.betas {
        let model = cfg.model(beta)?;
        for &gamma in &cfg.gammas {
            let sampler = model.sampler(gamma);
            let ctx = RowContext {
                cfg,
                beta,
                n: 2,
                gamma_or_w: Some(gamma),
            };
            for &l in &cfg.rounds {
                let outcomes: Vec<(bool, bool)> = (0..cfg.reps)
                    .into_par_iter()
                    .map(|r| two_item_replication(&sampler, l, cfg.seed, &[grid_id, r]))
                    .collect();
                let a = outcomes.iter().filter(|o| o.0).count() as u64;
                let b = outcomes.iter().filter(|o| o.1).count() as u64;
                let diffs: Vec<f64> = outcomes
                    .iter()
                    .map(|&(a, b)| b as u8 as f64 - a as u8 as f64)
                    .collect();
                rows.push(ctx.row(l, "prob_a_pos", stats::bernoulli(a, cfg.reps, z)));
                rows.push(ctx.row(l, "prob_b_pos", stats::bernoulli(b, cfg.reps, z)));
                rows.push(ctx.row(l, "diff_b_minus_a", stats::sample_mean(&diffs, z)));
                if cfg.include_limits {
                    let lim = asymptotic_two_item(&model, gamma, l)?;
                    rows.push(ctx.row(l, "limit_prob_a_pos", Estimate::exact(lim.p_ordinal)));
                    rows.push(ctx.row(l, "limit_prob_b_pos", Estimate::exact(lim.p_binary)));
                }
                grid_id += 1;
            }
        }
    }
    Ok(rows)
}

/// Pairwise samplers for a full comparison graph.
pub struct TauSimulator {
    n: usize,
    theta: Vec<f64>,
    samplers: Vec<(usize, usize, OutcomeSampler)>,
}

impl TauSimulator {
    pub fn new(model: &OrdinalModel, theta: &PreferenceVector) -> Self {
        let n = theta.n();
        let mut samplers = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                samplers.push((i, j, model.sampler(theta.gamma(i, j))));
            }
        }
        TauSimulator {
            n,
            theta: theta.theta().to_vec(),
            samplers,
        }
    }

    /// One replication: `(τ(S, θ), τ(S̃, θ))` from L rounds on every pair.
    pub fn replicate(&self, rounds: usize, seed: u64, coords: &[u64]) -> (f64, f64) {
        let mut rng = rng_for(seed, coords);
        let mut ord = vec![0i64; self.n];
        let mut bin = vec![0i64; self.n];
        for (i, j, sampler) in &self.samplers {
            let (mut s, mut t) = (0i64, 0i64);
            for _ in 0..rounds {
                let y = sampler.draw(&mut rng);
                s += y as i64;
                t += y.signum() as i64;
            }
            ord[*i] += s;
            ord[*j] -= s;
            bin[*i] += t;
            bin[*j] -= t;
        }
        // Kendall tau is invariant to the common 1/L factor.
        let pairs = (self.n * (self.n - 1) / 2) as f64;
        let to_f = |v: &[i64]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
        (
            misranked_pairs(&to_f(&ord), &self.theta) as f64 / pairs,
            misranked_pairs(&to_f(&bin), &self.theta) as f64 / pairs,
        )
    }

    /// All replications at one grid point, in replication order.
    pub fn run(&self, rounds: usize, reps: u64, seed: u64, grid_id: u64) -> (Vec<f64>, Vec<f64>) {
        (0..reps)
            .into_par_iter()
            .map(|r| self.replicate(rounds, seed, &[grid_id, r]))
            .collect::<Vec<_>>()
            .into_iter()
            .unzip()
    }
}

struct TauPoint {
    ordinal: Vec<f64>,
    binary: Vec<f64>,
}

fn tau_rows(
    ctx: &RowContext,
    model: &OrdinalModel,
    theta: &PreferenceVector,
    l: usize,
    point: &TauPoint,
    z: f64,
    rows: &mut Vec<ResultRow>,
) -> Result<()> {
    let gaps: Vec<f64> = point
        .ordinal
        .iter()
        .zip(&point.binary)
        .map(|(o, b)| o - b)
        .collect();
    rows.push(ctx.row(l, "tau_ordinal", stats::sample_mean(&point.ordinal, z)));
    rows.push(ctx.row(l, "tau_binary", stats::sample_mean(&point.binary, z)));
    rows.push(ctx.row(l, "tau_gap", stats::sample_mean(&gaps, z)));
    if ctx.cfg.include_limits {
        if let Ok(lim) = asymptotic_tau(model, theta, l) {
            rows.push(ctx.row(l, "limit_tau_ordinal", Estimate::exact(lim.ordinal)));
            rows.push(ctx.row(l, "limit_tau_binary", Estimate::exact(lim.binary)));
        }
    }
    Ok(())
}

fn theta_of(cfg: &ResolvedConfig) -> Result<&(PreferenceVector, Option<f64>)> {
    cfg.theta
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} needs θ", cfg.scenario.label())))
}

/// Per (β, L): `E[τ(S, θ)]`, `E[τ(S̃, θ)]` and their gap. When `ratio` is
/// set the binary/ordinal ratio is added, NaN when the ordinal mean is 0.
fn run_tau_grid(cfg: &ResolvedConfig, with_snr: bool, with_ratio: bool) -> Result<Vec<ResultRow>> {
    let (theta, width) = theta_of(cfg)?;
    let z = normal_two_sided_z(cfg.ci_level);
    let mut rows = Vec::new();
    let mut grid_id = 0u64;
    for &beta in &cfg.betas {
        let model = cfg.model(beta)?;
        let sim = TauSimulator::new(&model, theta);
        let ctx = RowContext {
            cfg,
            beta,
            n: theta.n(),
            gamma_or_w: *width,
        };
        for &l in &cfg.rounds {
            let (ordinal, binary) = sim.run(l, cfg.reps, cfg.seed, grid_id);
            let point = TauPoint { ordinal, binary };
            tau_rows(&ctx, &model, theta, l, &point, z, &mut rows)?;
            if with_ratio {
                let ratio = stats::ratio_of_means(&point.binary, &point.ordinal, z)
                    .unwrap_or_else(|| Estimate::undefined(cfg.reps));
                rows.push(ctx.row(l, "ratio", ratio));
            }
            if with_snr {
                let snr = snr_of_pattern(model.pattern()).snr;
                rows.push(ctx.row(l, "snr_x", Estimate::exact(snr)));
            }
            grid_id += 1;
        }
    }
    Ok(rows)
}

/// Tau curves over the L grid.
pub fn run_scenario1(cfg: &ResolvedConfig) -> Result<Vec<ResultRow>> {
    expect(cfg, Scenario::Scenario1)?;
    run_tau_grid(cfg, false, false)
}

/// Tau gap and exact SNR(X) per β.
pub fn run_scenario2(cfg: &ResolvedConfig) -> Result<Vec<ResultRow>> {
    expect(cfg, Scenario::Scenario2)?;
    run_tau_grid(cfg, true, false)
}

/// Ratio `R(S̃, S)` of binary to ordinal tau per L.
pub fn run_scenario3(cfg: &ResolvedConfig) -> Result<Vec<ResultRow>> {
    expect(cfg, Scenario::Scenario3)?;
    run_tau_grid(cfg, false, true)
}

fn expect(cfg: &ResolvedConfig, s: Scenario) -> Result<()> {
    if cfg.scenario != s {
        return Err(Error::Config(format!(
            "config is for {}, not {}",
            cfg.scenario.label(),
            s.label()
        )));
    }
    Ok(())
}

/// Least-squares slope of the defined `ratio` estimates against L.
pub fn ratio_trend(rows: &[ResultRow]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.metric == "ratio" && r.estimate.is_finite())
        .map(|r| (r.rounds as f64, r.estimate))
        .unzip();
    (x.len() >= 2).then(|| stats::ols_slope(&x, &y))
}

/// Spearman correlation between `−SNR(X)` and the tau gap across β.
pub fn snr_gap_correlation(rows: &[ResultRow]) -> Option<f64> {
    let snr: Vec<f64> = rows
        .iter()
        .filter(|r| r.metric == "snr_x")
        .map(|r| -r.estimate)
        .collect();
    let gap: Vec<f64> = rows
        .iter()
        .filter(|r| r.metric == "tau_gap")
        .map(|r| r.estimate)
        .collect();
    (snr.len() == gap.len() && snr.len() >= 2).then(|| stats::spearman(&snr, &gap))
}
