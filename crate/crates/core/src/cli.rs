//! The `ordrank` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data, configuration or
//! convergence errors. Machine-readable output goes to stdout or `--out`;
//! diagnostics go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::data::{
    build_pair_comparisons, evaluate_pair_protocol, load_ratings, ordinal_histogram, synthesize_ratings,
    write_movielens_tab, EvaluationOptions, PairComparisons, Pairing, RatingsFormat, DEFAULT_MIN_PAIR_COUNT,
};
use crate::harness::{run_experiment_timed, ExperimentConfig};
use crate::large_deviations::{compare_rates, RateComparison, DEFAULT_CROSSOVER_FACTOR};
use crate::model::{ModelDescriptor, OrdinalModel, OutcomeMoments, PatternDistribution, PatternSpec, StrengthLink};
use crate::pattern_analysis::{minimal_snr_monotone, minimal_snr_unconstrained, snr_of_pattern, SnrReport};
use crate::ranking::{count_scores, kendall_tau, ComparisonDataset, PreferenceVector, ScorePair};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ordrank", version, about = "Ordinal paired comparisons and counting-based ranking")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Base seed (overrides the config seed for `simulate`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Attach run metadata (timing, thread count) to JSON output.
    #[arg(long, global = true)]
    pub annotate: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// `cubic|identity|tanhsig|logitnorm|logitlogistic[:scale]`
    #[arg(long, default_value = "identity", value_parser = parse_link)]
    pub link: StrengthLink,
    /// Pattern spec, e.g. `abs:0.1`, `sq:1`, `uniform`, `weights:...`, optionally with `,K=<n>`.
    #[arg(long, value_parser = parse_pattern)]
    pub pattern: (PatternSpec, Option<usize>),
    #[arg(long = "K")]
    pub k: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// SNR of the magnitude distribution of a pattern.
    Snr {
        #[arg(long = "K")]
        k: Option<usize>,
        #[arg(long, value_parser = parse_pattern)]
        psi: (PatternSpec, Option<usize>),
    },
    /// Minimal attainable SNR and the pattern attaining it.
    SnrMin {
        #[arg(long = "K")]
        k: usize,
        /// Restrict to non-increasing patterns.
        #[arg(long)]
        monotone: bool,
    },
    /// Count scores and Kendall tau of a comparison dataset.
    Rank {
        /// CSV with header `i,j,l,y`.
        #[arg(long)]
        input: PathBuf,
        /// JSON array of strengths, or `{"theta": [...]}`.
        #[arg(long)]
        theta: PathBuf,
    },
    /// Rate functions at zero for ordinal and binarized data.
    Rates {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        gamma: f64,
        /// Error-ratio threshold for the L₀ estimate.
        #[arg(long, default_value_t = DEFAULT_CROSSOVER_FACTOR)]
        factor: f64,
    },
    /// Run a Monte-Carlo experiment and write CSV rows.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Use the replication counts of the original study.
        #[arg(long)]
        paper_scale: bool,
    },
    /// Turn a ratings file into per-pair rating differences.
    Ingest {
        #[arg(long, value_parser = parse_format)]
        format: RatingsFormat,
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value_t = 1)]
        min_item_ratings: usize,
    },
    /// Held-out pair evaluation of sum vs sign-sum aggregation.
    Evaluate {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = 0.7)]
        train_frac: f64,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_PAIR_COUNT)]
        min_pair_count: usize,
        /// `by-repetition` or `by-pair`.
        #[arg(long, default_value = "by-repetition", value_parser = parse_pairing)]
        pairing: Pairing,
    },
    /// Histogram of absolute rating differences.
    Histogram {
        #[arg(long)]
        pairs: PathBuf,
        /// Comma-separated bin edges; integer bins when omitted.
        #[arg(long, value_delimiter = ',')]
        edges: Option<Vec<f64>>,
    },
    /// Model descriptor, SNR and, given `--gamma`, the outcome law.
    ModelInfo {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Generate a ratings file (tab format) from the ordinal model.
    Synth {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Spacing of the equally spaced strengths.
        #[arg(long, default_value_t = 0.05)]
        width: f64,
        #[arg(long, default_value_t = 30)]
        users_per_pair: usize,
    },
}

fn parse_link(s: &str) -> std::result::Result<StrengthLink, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pattern(s: &str) -> std::result::Result<(PatternSpec, Option<usize>), String> {
    PatternSpec::parse_with_k(s).map_err(|e| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<RatingsFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pairing(s: &str) -> std::result::Result<Pairing, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `snr-min` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalSnrOutput {
    #[serde(rename = "K")]
    pub k: usize,
    pub monotone: bool,
    pub value: f64,
    pub weights: Vec<f64>,
}

/// `rank` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOutput {
    #[serde(flatten)]
    pub scores: ScorePair,
    pub tau_ordinal: f64,
    pub tau_binary: f64,
}

/// `rates` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatesOutput {
    pub link: String,
    pub pattern: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(flatten)]
    pub rates: RateComparison,
    pub l0_note: String,
}

/// `ingest` summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub ratings: usize,
    pub pairs: usize,
    pub comparisons: usize,
    pub min_item_ratings: usize,
    pub output: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaInfo {
    pub gamma: f64,
    pub phi: f64,
    pub prob_positive: f64,
    pub moments: OutcomeMoments,
    pub pmf: Vec<(i32, f64)>,
}

/// `model-info` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model: ModelDescriptor,
    pub snr_x: SnrReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_gamma: Option<GammaInfo>,
}

/// Run metadata, only emitted with `--annotate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub elapsed_seconds: f64,
    pub threads: usize,
    pub version: String,
}

#[derive(Serialize)]
struct Annotated<'a, T: Serialize> {
    #[serde(flatten)]
    body: &'a T,
    annotation: Annotation,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn resolve_k(flag: Option<usize>, embedded: Option<usize>) -> std::result::Result<usize, Failure> {
    match (flag, embedded) {
        (Some(a), Some(b)) if a != b => Err(usage(format!("--K {a} conflicts with K={b} in the pattern"))),
        (Some(k), _) | (None, Some(k)) => Ok(k),
        (None, None) => Err(usage("K is required (pass --K or append ,K=<n> to the pattern)")),
    }
}

fn build_pattern(spec: &(PatternSpec, Option<usize>), k: Option<usize>) -> std::result::Result<PatternDistribution, Failure> {
    let k = match (&spec.0, k, spec.1) {
        (PatternSpec::Weights(w), None, None) => w.len(),
        _ => resolve_k(k, spec.1)?,
    };
    Ok(spec.0.build(k)?)
}

impl ModelArgs {
    fn model(&self) -> std::result::Result<OrdinalModel, Failure> {
        Ok(OrdinalModel::new(self.link.clone(), build_pattern(&self.pattern, self.k)?))
    }
}

/// Output is buffered so the command can run inside a worker pool.
struct Context<'a> {
    out: Option<&'a Path>,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
    annotate: bool,
    started: Instant,
}

impl Context<'_> {
    fn emit_bytes(&mut self, bytes: &[u8]) -> Result<()> {
        match self.out {
            Some(path) => std::fs::write(path, bytes).map_err(|e| Error::file(path, e)),
            None => {
                self.stdout.write_all(bytes)?;
                self.stdout.flush()?;
                Ok(())
            }
        }
    }

    fn emit_json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let mut text = if self.annotate {
            serde_json::to_string_pretty(&Annotated {
                body: value,
                annotation: self.annotation(),
            })?
        } else {
            serde_json::to_string_pretty(value)?
        };
        text.push('\n');
        self.emit_bytes(text.as_bytes())
    }

    fn annotation(&self) -> Annotation {
        Annotation {
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

fn read_theta(path: &Path) -> Result<PreferenceVector> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum ThetaFile {
        Bare(Vec<f64>),
        Wrapped { theta: Vec<f64> },
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let theta = match serde_json::from_str(&text)? {
        ThetaFile::Bare(v) | ThetaFile::Wrapped { theta: v } => v,
    };
    PreferenceVector::new(theta)
}

fn dispatch(cli: &Cli, ctx: &mut Context<'_>) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Snr { k, psi } => {
            let pattern = build_pattern(psi, *k)?;
            ctx.emit_json(&snr_of_pattern(&pattern))?;
        }
        Command::SnrMin { k, monotone } => {
            let m = if *monotone {
                minimal_snr_monotone(*k)?
            } else {
                minimal_snr_unconstrained(*k)?
            };
            ctx.emit_json(&MinimalSnrOutput {
                k: *k,
                monotone: *monotone,
                value: m.value,
                weights: m.pattern.weights().to_vec(),
            })?;
        }
        Command::Rank { input, theta } => {
            let file = std::fs::File::open(input).map_err(|e| Error::file(input, e))?;
            let data = ComparisonDataset::from_csv(std::io::BufReader::new(file))?;
            let theta = read_theta(theta)?;
            if theta.n() != data.n() {
                return Err(Error::CorruptData(format!(
                    "θ has {} items but the dataset has {}",
                    theta.n(),
                    data.n()
                ))
                .into());
            }
            let scores = count_scores(&data);
            let tau_ordinal = kendall_tau(&scores.ordinal_scores, &theta)?;
            let tau_binary = kendall_tau(&scores.binary_scores, &theta)?;
            ctx.emit_json(&RankOutput {
                scores,
                tau_ordinal,
                tau_binary,
            })?;
        }
        Command::Rates { model, gamma, factor } => {
            if !(*factor > 1.0) {
                return Err(usage("--factor must exceed 1"));
            }
            let m = model.model()?;
            let rates = compare_rates(&m, *gamma, *factor);
            if !rates.ordinal.converged || !rates.binary.converged {
                return Err(Error::Convergence(format!("rate minimization at γ = {gamma}")).into());
            }
            ctx.emit_json(&RatesOutput {
                link: m.link().label(),
                pattern: model.pattern.0.label(),
                k: m.k(),
                rates,
                l0_note: "heuristic from leading-order exponential decay, not a bound".into(),
            })?;
        }
        Command::Simulate { config, paper_scale } => {
            let mut cfg = ExperimentConfig::load(config)?;
            if *paper_scale {
                cfg = cfg.paper_scale();
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let result = run_experiment_timed(&cfg, ctx.annotate)?;
            let mut buf = Vec::new();
            result.write_csv(&mut buf)?;
            ctx.emit_bytes(&buf)?;
            if let Some(t) = result.elapsed_seconds {
                let a = Annotation {
                    elapsed_seconds: t,
                    ..ctx.annotation()
                };
                writeln!(ctx.stderr, "{}", serde_json::to_string(&a).map_err(Error::from)?).map_err(Error::from)?;
            }
        }
        Command::Ingest {
            format,
            path,
            min_item_ratings,
        } => {
            let out = ctx
                .out
                .ok_or_else(|| usage("ingest needs --out for the binary pairs file"))?;
            let table = load_ratings(path, *format)?;
            let pairs = build_pair_comparisons(&table, *min_item_ratings)?;
            pairs.save(out)?;
            let summary = IngestSummary {
                ratings: table.len(),
                pairs: pairs.len(),
                comparisons: pairs.total_comparisons(),
                min_item_ratings: *min_item_ratings,
                output: out.display().to_string(),
            };
            let text = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
            writeln!(ctx.stdout, "{text}").map_err(Error::from)?;
        }
        Command::Evaluate {
            pairs,
            train_frac,
            reps,
            min_pair_count,
            pairing,
        } => {
            let data = PairComparisons::load(pairs)?;
            let opts = EvaluationOptions {
                train_frac: *train_frac,
                repetitions: *reps,
                min_pair_count: *min_pair_count,
                seed: cli.seed.unwrap_or(7),
                pairing: *pairing,
            };
            ctx.emit_json(&evaluate_pair_protocol(&data, &opts)?)?;
        }
        Command::Histogram { pairs, edges } => {
            let data = PairComparisons::load(pairs)?;
            let h = ordinal_histogram(&data, edges.as_deref())?;
            if !h.non_increasing {
                writeln!(ctx.stderr, "warning: counts increase with magnitude somewhere").map_err(Error::from)?;
            }
            ctx.emit_json(&h)?;
        }
        Command::ModelInfo { model, gamma } => {
            let m = model.model()?;
            let at_gamma = gamma.map(|g| GammaInfo {
                gamma: g,
                phi: m.phi(g),
                prob_positive: m.prob_positive(g),
                moments: m.moments(g),
                pmf: m.pmf_table(g),
            });
            ctx.emit_json(&ModelInfo {
                model: ModelDescriptor::try_from(&m)?,
                snr_x: snr_of_pattern(m.pattern()),
                at_gamma,
            })?;
        }
        Command::Synth {
            model,
            n,
            width,
            users_per_pair,
        } => {
            let m = model.model()?;
            let theta = PreferenceVector::equally_spaced(*n, *width)?;
            let table = synthesize_ratings(&m, &theta, *users_per_pair, cli.seed.unwrap_or(7))?;
            let mut buf = Vec::new();
            write_movielens_tab(&table, &mut buf)?;
            ctx.emit_bytes(&buf)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };

    let mut ctx = Context {
        out: cli.out.as_deref(),
        stdout: Vec::new(),
        stderr: Vec::new(),
        annotate: cli.annotate,
        started: Instant::now(),
    };
    let outcome = match cli.threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut ctx)),
            Err(e) => Err(Failure::Run(Error::Config(e.to_string()))),
        },
        None => dispatch(&cli, &mut ctx),
    };
    let code = match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(ctx.stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(ctx.stderr, "error: {e}");
            EXIT_FAILURE
        }
    };
    if stdout.write_all(&ctx.stdout).and_then(|_| stdout.flush()).is_err() {
        return EXIT_FAILURE;
    }
    let _ = stderr.write_all(&ctx.stderr);
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["ordrank"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn snr_caption_value() {
        let (code, out, _) = call(&["snr", "--K", "4", "--psi", "abs:0.1"]);
        assert_eq!(code, 0);
        let r: SnrReport = serde_json::from_str(&out).unwrap();
        assert!((r.snr - 4.5523).abs() < 1e-3);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["snr", "--K", "4", "--psi", "bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["snr", "--psi", "abs:0.1"]).0, EXIT_USAGE);
        let (code, _, err) = call(&["snr", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--bogus"));
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_config_exits_two() {
        let (code, _, err) = call(&["simulate", "--config", "definitely-missing.json"]);
        assert_eq!(code, EXIT_FAILURE);
        assert!(err.contains("definitely-missing.json"), "{err}");
    }

    #[test]
    fn outputs_reparse() {
        let (_, out, _) = call(&["snr-min", "--K", "4", "--monotone"]);
        let m: MinimalSnrOutput = serde_json::from_str(&out).unwrap();
        assert!((m.value - 24.0 * 5.0 / 49.0).abs() < 1e-12);

        let (_, out, _) = call(&["rates", "--pattern", "abs:0.1,K=4", "--gamma", "0.15"]);
        let r: RatesOutput = serde_json::from_str(&out).unwrap();
        assert!(r.rates.binary.rate > r.rates.ordinal.rate);

        let (_, out, _) = call(&["model-info", "--pattern", "sq:1", "--K", "3", "--gamma", "0.2"]);
        let info: ModelInfo = serde_json::from_str(&out).unwrap();
        assert_eq!(info.at_gamma.unwrap().pmf.len(), 6);
    }

    #[test]
    fn annotate_adds_metadata() {
        let (_, plain, _) = call(&["snr", "--K", "4", "--psi", "uniform"]);
        assert!(!plain.contains("elapsed"));
        let (_, annotated, _) = call(&["--annotate", "snr", "--K", "4", "--psi", "uniform"]);
        assert!(annotated.contains("elapsed_seconds"));
    }
}
