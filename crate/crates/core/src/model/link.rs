use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::special::log_normal_sf;
use crate::{Error, Result};

/// Symmetric base distribution for logit-of-CDF links.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseCdf {
    Logistic,
    StandardNormal,
}

type HalfLine = dyn Fn(f64) -> f64 + Send + Sync;

/// User-supplied link, defined on `x ≥ 0` and mirrored to the negative axis.
#[derive(Clone)]
pub struct CustomLink {
    name: String,
    on_positive: Arc<HalfLine>,
}

impl CustomLink {
    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLink").field("name", &self.name).finish()
    }
}

#[derive(Clone, Debug)]
pub enum LinkKind {
    /// `x³`
    Cubic,
    /// `x`
    Identity,
    /// `(1 − e^{−x}) / (1 + e^{−x})`, i.e. `tanh(x/2)`.
    TanhSigmoid,
    /// `log(F(x) / (1 − F(x)))` for a symmetric CDF `F`.
    LogitOfCdf(BaseCdf),
    Custom(CustomLink),
}

/// A strength link φ scaled by a positive constant: increasing and odd.
///
/// Every kind is evaluated on `|x|` and mirrored, so `φ(−x) = −φ(x)` holds
/// bit-for-bit.
#[derive(Clone, Debug)]
pub struct StrengthLink {
    kind: LinkKind,
    scale: f64,
}

impl StrengthLink {
    fn of(kind: LinkKind) -> Self {
        StrengthLink { kind, scale: 1.0 }
    }

    pub fn identity() -> Self {
        Self::of(LinkKind::Identity)
    }

    pub fn cubic() -> Self {
        Self::of(LinkKind::Cubic)
    }

    pub fn tanh_sigmoid() -> Self {
        Self::of(LinkKind::TanhSigmoid)
    }

    pub fn logit_of_cdf(base: BaseCdf) -> Self {
        Self::of(LinkKind::LogitOfCdf(base))
    }

    /// `½ log(σ/(1−σ))`: binarized data follow Bradley–Terry–Luce.
    pub fn btl() -> Self {
        Self::logit_of_cdf(BaseCdf::Logistic).scaled(0.5)
    }

    /// `½ log(Φ/(1−Φ))`: binarized data follow Thurstone–Mosteller.
    pub fn thurstone_mosteller() -> Self {
        Self::logit_of_cdf(BaseCdf::StandardNormal).scaled(0.5)
    }

    /// Builds a link from its values on the non-negative half-line.
    ///
    /// `f(0)` must be 0 and `f` must be strictly increasing; both are checked
    /// on a grid over `[0, 10]`.
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if f(0.0) != 0.0 {
            return Err(Error::domain("custom link must vanish at the origin"));
        }
        let mut prev = 0.0;
        for i in 1..=1000 {
            let v = f(i as f64 * 0.01);
            if !(v > prev) {
                return Err(Error::domain(
                    "custom link must be strictly increasing on x ≥ 0",
                ));
            }
            prev = v;
        }
        Ok(Self::of(LinkKind::Custom(CustomLink {
            name: name.into(),
            on_positive: Arc::new(f),
        })))
    }

    /// Returns the same link multiplied by `scale` (> 0).
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::domain(format!("link scale must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    fn scaled(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn kind(&self) -> &LinkKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// φ(x); rejects non-finite input.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("link argument must be finite, got {x}")));
        }
        Ok(self.apply(x))
    }

    /// φ(x) without the finiteness check.
    pub(crate) fn apply(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let a = x.abs();
        let v = self.scale * self.unscaled_positive(a);
        if x < 0.0 {
            -v
        } else {
            v
        }
    }

    fn unscaled_positive(&self, a: f64) -> f64 {
        match &self.kind {
            LinkKind::Cubic => a * a * a,
            LinkKind::Identity => a,
            LinkKind::TanhSigmoid => (0.5 * a).tanh(),
            // log σ(a) − log(1 − σ(a)) = a exactly.
            LinkKind::LogitOfCdf(BaseCdf::Logistic) => a,
            LinkKind::LogitOfCdf(BaseCdf::StandardNormal) => {
                // For a ≥ 0 the upper tail is the small quantity; take log Φ
                // as log1p(−tail) so neither term cancels.
                let log_tail = log_normal_sf(a);
                (-log_tail.exp()).ln_1p() - log_tail
            }
            LinkKind::Custom(c) => (c.on_positive)(a),
        }
    }

    /// Short label in the CLI mini-language (`identity`, `logitnorm:0.5`, ...).
    pub fn label(&self) -> String {
        let base = match &self.kind {
            LinkKind::Cubic => "cubic".to_string(),
            LinkKind::Identity => "identity".to_string(),
            LinkKind::TanhSigmoid => "tanhsig".to_string(),
            LinkKind::LogitOfCdf(BaseCdf::Logistic) => "logitlogistic".to_string(),
            LinkKind::LogitOfCdf(BaseCdf::StandardNormal) => "logitnorm".to_string(),
            LinkKind::Custom(c) => format!("custom-{}", c.name),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{base}:{}", self.scale)
        }
    }
}

/// Parses `cubic|identity|tanhsig|logitnorm|logitlogistic[:scale]`.
impl FromStr for StrengthLink {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, scale) = match s.split_once(':') {
            Some((n, c)) => {
                let c: f64 = c
                    .trim()
                    .parse()
                    .map_err(|_| Error::domain(format!("bad link scale in {s:?}")))?;
                (n.trim(), Some(c))
            }
            None => (s, None),
        };
        let link = match name {
            "cubic" => Self::cubic(),
            "identity" => Self::identity(),
            "tanhsig" | "tanh-sigmoid" => Self::tanh_sigmoid(),
            "logitnorm" => Self::logit_of_cdf(BaseCdf::StandardNormal),
            "logitlogistic" => Self::logit_of_cdf(BaseCdf::Logistic),
            other => return Err(Error::domain(format!("unknown link {other:?}"))),
        };
        match scale {
            Some(c) => link.with_scale(c),
            None => Ok(link),
        }
    }
}

impl fmt::Display for StrengthLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
