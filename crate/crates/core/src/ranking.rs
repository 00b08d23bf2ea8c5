//! Counting scores, Kendall-tau ranking error, expected scores and the
//! closed-form large-L predictors for ordinal vs binarized counting.

use std::collections::BTreeMap;
use std::io::Read;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::OrdinalModel;
use crate::special::normal_cdf;
use crate::{Error, Result};

/// True preference vector θ⋆.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceVector {
    theta: Vec<f64>,
    #[serde(default)]
    centered: bool,
}

impl PreferenceVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() || theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("θ must be a non-empty vector of finite reals"));
        }
        let centered = theta.iter().sum::<f64>().abs() <= 1e-10;
        Ok(PreferenceVector { theta, centered })
    }

    /// Shifts θ to satisfy `Σθ = 0`.
    pub fn centered(theta: Vec<f64>) -> Result<Self> {
        let mut p = Self::new(theta)?;
        let mean = p.theta.iter().sum::<f64>() / p.theta.len() as f64;
        for t in &mut p.theta {
            *t -= mean;
        }
        p.centered = true;
        Ok(p)
    }

    /// `n` items spaced by `width`, item 0 strongest, centered at 0.
    pub fn equally_spaced(n: usize, width: f64) -> Result<Self> {
        if n == 0 || !(width.is_finite() && width > 0.0) {
            return Err(Error::domain("equally spaced θ needs n ≥ 1 and width > 0"));
        }
        let mid = (n as f64 - 1.0) / 2.0;
        Self::centered((0..n).map(|i| width * (mid - i as f64)).collect())
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// `γ⋆_ij = θ⋆_i − θ⋆_j`.
    pub fn gamma(&self, i: usize, j: usize) -> f64 {
        self.theta[i] - self.theta[j]
    }

    fn has_ties(&self) -> bool {
        let mut sorted = self.theta.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).any(|w| w[0] == w[1])
    }
}

/// Position of pair `(i, j)`, `i < j`, in row-major upper-triangular order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Outcomes per unordered pair, stored in the `i < j` orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonDataset {
    n: usize,
    k: usize,
    rounds: usize,
    pairs: Vec<Option<Vec<i32>>>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    i: usize,
    j: usize,
    l: usize,
    y: i32,
}

impl ComparisonDataset {
    /// Empty dataset; pairs are added with [`insert`](Self::insert).
    pub fn new(n: usize, k: usize, rounds: usize) -> Result<Self> {
        if n < 2 || k < 1 || rounds < 1 {
            return Err(Error::domain("dataset needs n ≥ 2, K ≥ 1 and L ≥ 1"));
        }
        Ok(ComparisonDataset {
            n,
            k,
            rounds,
            pairs: vec![None; n * (n - 1) / 2],
        })
    }

    /// Stores `y_ij`; given `i > j` the outcomes are flipped to `y_ji`.
    pub fn insert(&mut self, i: usize, j: usize, outcomes: Vec<i32>) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::domain(format!("bad pair ({i}, {j}) for n = {}", self.n)));
        }
        if outcomes.len() != self.rounds {
            return Err(Error::CorruptData(format!(
                "pair ({i}, {j}) has {} rounds, expected {}",
                outcomes.len(),
                self.rounds
            )));
        }
        if let Some(bad) = outcomes
            .iter()
            .find(|y| **y == 0 || y.unsigned_abs() as usize > self.k)
        {
            return Err(Error::CorruptData(format!(
                "outcome {bad} for pair ({i}, {j}) is outside ±1..=±{}",
                self.k
            )));
        }
        let (a, b, oriented) = if i < j {
            (i, j, outcomes)
        } else {
            (j, i, outcomes.into_iter().map(|y| -y).collect())
        };
        self.pairs[pair_index(self.n, a, b)] = Some(oriented);
        Ok(())
    }

    /// Draws a full dataset from the model.
    pub fn simulate<R: Rng + ?Sized>(
        model: &OrdinalModel,
        theta: &PreferenceVector,
        rounds: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let n = theta.n();
        let mut data = Self::new(n, model.k(), rounds)?;
        for i in 0..n {
            for j in i + 1..n {
                let y = model.sample(theta.gamma(i, j), rng, rounds);
                data.pairs[pair_index(n, i, j)] = Some(y);
            }
        }
        Ok(data)
    }

    /// Reads `i,j,l,y` CSV (zero-based items, one-based rounds).
    ///
    /// `n` and `K` are inferred from the largest index and magnitude. Every
    /// present pair must carry rounds `1..=L` for a common L.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut cells: BTreeMap<(usize, usize), BTreeMap<usize, i32>> = BTreeMap::new();
        let mut n = 0;
        let mut k = 0;
        for (row, rec) in rdr.deserialize::<CsvRow>().enumerate() {
            let line = row + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            if rec.i == rec.j {
                return Err(Error::Parse {
                    line,
                    msg: "self-comparison".into(),
                });
            }
            if rec.y == 0 {
                return Err(Error::Parse {
                    line,
                    msg: "zero outcome".into(),
                });
            }
            if rec.l == 0 {
                return Err(Error::Parse {
                    line,
                    msg: "round index is one-based".into(),
                });
            }
            let (key, y) = if rec.i < rec.j {
                ((rec.i, rec.j), rec.y)
            } else {
                ((rec.j, rec.i), -rec.y)
            };
            if cells.entry(key).or_default().insert(rec.l, y).is_some() {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate round {} for pair {key:?}", rec.l),
                });
            }
            n = n.max(key.1 + 1);
            k = k.max(y.unsigned_abs() as usize);
        }
        let rounds = cells
            .values()
            .next()
            .map(|m| m.len())
            .ok_or_else(|| Error::CorruptData("dataset has no rows".into()))?;
        let mut data = Self::new(n.max(2), k, rounds)?;
        for ((i, j), by_round) in cells {
            if by_round.len() != rounds || by_round.keys().next_back() != Some(&rounds) {
                return Err(Error::CorruptData(format!(
                    "pair ({i}, {j}) does not have rounds 1..={rounds}"
                )));
            }
            data.insert(i, j, by_round.into_values().collect())?;
        }
        Ok(data)
    }

    pub fn to_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["i", "j", "l", "y"])?;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if let Some(ys) = self.pair(i, j) {
                    for (l, y) in ys.iter().enumerate() {
                        w.serialize((i, j, l + 1, y))?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Stored outcomes for `i < j`.
    pub fn pair(&self, i: usize, j: usize) -> Option<&[i32]> {
        self.pairs[pair_index(self.n, i, j)].as_deref()
    }

    /// `y_ij` in either orientation.
    pub fn oriented(&self, i: usize, j: usize) -> Option<Vec<i32>> {
        if i < j {
            self.pair(i, j).map(<[i32]>::to_vec)
        } else {
            self.pair(j, i).map(|ys| ys.iter().map(|y| -y).collect())
        }
    }

    pub fn is_full(&self) -> bool {
        self.pairs.iter().all(Option::is_some)
    }

    /// Sign view of the data (K = 1).
    pub fn binarized(&self) -> ComparisonDataset {
        ComparisonDataset {
            n: self.n,
            k: 1,
            rounds: self.rounds,
            pairs: self
                .pairs
                .iter()
                .map(|p| p.as_ref().map(|ys| ys.iter().map(|y| y.signum()).collect()))
                .collect(),
        }
    }
}

/// Count scores from raw outcomes (S) and from their signs (S̃).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub ordinal_scores: Vec<f64>,
    pub binary_scores: Vec<f64>,
}

/// `A` (mean outcome) and `B` (mean sign) of a two-item sequence.
pub fn two_item_metrics(outcomes: &[i32]) -> Result<(f64, f64)> {
    if outcomes.is_empty() {
        return Err(Error::domain("two-item metrics need L ≥ 1"));
    }
    let signs = crate::model::binarize(outcomes)?;
    let l = outcomes.len() as f64;
    let a = outcomes.iter().map(|&y| y as i64).sum::<i64>() as f64 / l;
    let b = signs.iter().map(|&s| s as i64).sum::<i64>() as f64 / l;
    Ok((a, b))
}

/// Unnormalized per-item outcome and sign totals; each sums to exactly 0.
pub fn count_totals(data: &ComparisonDataset) -> (Vec<i64>, Vec<i64>) {
    let n = data.n();
    let mut ord = vec![0i64; n];
    let mut bin = vec![0i64; n];
    for i in 0..n {
        for j in i + 1..n {
            if let Some(ys) = data.pair(i, j) {
                let s: i64 = ys.iter().map(|&y| y as i64).sum();
                let t: i64 = ys.iter().map(|&y| y.signum() as i64).sum();
                ord[i] += s;
                ord[j] -= s;
                bin[i] += t;
                bin[j] -= t;
            }
        }
    }
    (ord, bin)
}

/// `S_i = (1/L) Σ_{j≠i} Σ_l y_ij` and `S̃_i` with signs in place of outcomes.
pub fn count_scores(data: &ComparisonDataset) -> ScorePair {
    let l = data.rounds() as f64;
    let (ord, bin) = count_totals(data);
    ScorePair {
        ordinal_scores: ord.iter().map(|&s| s as f64 / l).collect(),
        binary_scores: bin.iter().map(|&s| s as f64 / l).collect(),
    }
}

/// Number of pairs with `(s_i − s_j)(θ_i − θ_j) ≤ 0`; score ties are errors.
pub fn misranked_pairs(scores: &[f64], theta: &[f64]) -> usize {
    let n = scores.len();
    let mut bad = 0;
    for i in 0..n {
        for j in i + 1..n {
            if (scores[i] - scores[j]) * (theta[i] - theta[j]) <= 0.0 {
                bad += 1;
            }
        }
    }
    bad
}

/// Fraction of misranked item pairs.
pub fn kendall_tau(scores: &[f64], theta: &PreferenceVector) -> Result<f64> {
    let n = theta.n();
    if scores.len() != n {
        return Err(Error::domain(format!(
            "{} scores for {n} items",
            scores.len()
        )));
    }
    if n < 2 {
        return Err(Error::domain("Kendall tau needs at least two items"));
    }
    let pairs = n * (n - 1) / 2;
    Ok(misranked_pairs(scores, theta.theta()) as f64 / pairs as f64)
}

/// Expected scores `S⋆ = E[X]·S̃⋆` with `S̃⋆_i = Σ_{j≠i} tanh φ(γ⋆_ij)`.
pub fn expected_scores(model: &OrdinalModel, theta: &PreferenceVector) -> (Vec<f64>, Vec<f64>) {
    let n = theta.n();
    let mut tilde = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            let t = model.phi(theta.gamma(i, j)).tanh();
            tilde[i] += t;
            tilde[j] -= t;
        }
    }
    let ex = model.pattern().mean();
    let star = tilde.iter().map(|s| ex * s).collect();
    (star, tilde)
}

/// Large-L limits of `P(B > 0)` and `P(A > 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoItemLimits {
    pub p_binary: f64,
    pub p_ordinal: f64,
}

/// `1/SNR(X)`, zero for a degenerate pattern.
fn inverse_snr_x(model: &OrdinalModel) -> f64 {
    let p = model.pattern();
    if p.is_degenerate() {
        return 0.0;
    }
    let ex = p.mean();
    (p.second_moment() - ex * ex).max(0.0) / (ex * ex)
}

/// `P(B>0) → Φ(√L sinh φ)`,
/// `P(A>0) → Φ(√L tanh φ / √(1/SNR(X) + 1 − tanh² φ))`.
pub fn asymptotic_two_item(model: &OrdinalModel, gamma: f64, rounds: usize) -> Result<TwoItemLimits> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("γ must be positive, got {gamma}")));
    }
    if rounds == 0 {
        return Err(Error::domain("L must be at least 1"));
    }
    let phi = model.phi(gamma);
    let root_l = (rounds as f64).sqrt();
    let p_binary = normal_cdf(root_l * phi.sinh());
    let inv = inverse_snr_x(model);
    let p_ordinal = if inv == 0.0 {
        p_binary
    } else {
        let sech2 = 1.0 / phi.cosh().powi(2);
        normal_cdf(root_l * phi.tanh() / (inv + sech2).sqrt())
    };
    Ok(TwoItemLimits {
        p_binary,
        p_ordinal,
    })
}

/// Large-L limits of `E[τ(S, θ⋆)]` and `E[τ(S̃, θ⋆)]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauLimits {
    pub ordinal: f64,
    pub binary: f64,
}

/// Averages `Φ(−√(2nL) D̄_ij / √(1/SNR(X) + 1 − V̄_ij))` over pairs, with
/// `D̄_ij = (1/2n)[2t_ij + Σ_k (t_ik − t_jk)]` and
/// `V̄_ij = (1/2n)[4t²_ij + Σ_k (t²_ik + t²_jk)]`, `t = tanh φ(γ)`.
/// The binary limit drops the `1/SNR(X)` term.
pub fn asymptotic_tau(model: &OrdinalModel, theta: &PreferenceVector, rounds: usize) -> Result<TauLimits> {
    let n = theta.n();
    if n < 2 || rounds == 0 {
        return Err(Error::domain("tau limits need n ≥ 2 and L ≥ 1"));
    }
    if theta.has_ties() {
        return Err(Error::domain("tau limits need strictly ordered θ"));
    }
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                t[i * n + j] = model.phi(theta.gamma(i, j)).tanh();
            }
        }
    }
    let inv = inverse_snr_x(model);
    let two_n = 2.0 * n as f64;
    let scale = (two_n * rounds as f64).sqrt();
    let (mut ord, mut bin) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let mut d = 2.0 * t[i * n + j];
            let mut v = 4.0 * t[i * n + j].powi(2);
            for k in (0..n).filter(|&k| k != i && k != j) {
                d += t[i * n + k] - t[j * n + k];
                v += t[i * n + k].powi(2) + t[j * n + k].powi(2);
            }
            let d = (d / two_n).abs();
            let v = v / two_n;
            ord += normal_cdf(-scale * d / (inv + 1.0 - v).sqrt());
            bin += normal_cdf(-scale * d / (1.0 - v).sqrt());
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(TauLimits {
        ordinal: ord / pairs,
        binary: bin / pairs,
    })
}

/// Upper bound on `(2K)^L` for [`exact_two_item`].
pub const MAX_ENUMERATION: u64 = 50_000_000;

/// Exact `P(A > 0)` and `P(B > 0)` by enumerating all `(2K)^L` sequences.
pub fn exact_two_item(model: &OrdinalModel, gamma: f64, rounds: usize) -> Result<TwoItemLimits> {
    let table: Vec<(i32, f64)> = model
        .pmf_table(gamma)
        .into_iter()
        .filter(|(_, p)| *p > 0.0)
        .collect();
    let width = table.len() as u64;
    let total = width
        .checked_pow(rounds as u32)
        .filter(|t| *t <= MAX_ENUMERATION)
        .ok_or_else(|| Error::domain("sequence space too large to enumerate"))?;
    let (mut pa, mut pb) = (0.0, 0.0);
    for code in 0..total {
        let mut c = code;
        let (mut sum, mut signs, mut prob) = (0i64, 0i64, 1.0);
        for _ in 0..rounds {
            let (y, p) = table[(c % width) as usize];
            c /= width;
            sum += y as i64;
            signs += y.signum() as i64;
            prob *= p;
        }
        if sum > 0 {
            pa += prob;
        }
        if signs > 0 {
            pb += prob;
        }
    }
    Ok(TwoItemLimits {
        p_binary: pb,
        p_ordinal: pa,
    })
}
