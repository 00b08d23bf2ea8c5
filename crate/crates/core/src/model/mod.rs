//! Strength links, pattern distributions and the ordinal comparison model.

mod link;
mod ordinal;
mod pattern;

pub use link::{BaseCdf, CustomLink, LinkKind, StrengthLink};
pub use ordinal::{binarize, OrdinalModel, OutcomeMoments, OutcomeSampler};
pub use pattern::{PatternDistribution, PatternSpec};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// JSON form of a link: `{"kind": ..., "scale": ..., "base_cdf": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkDescriptor {
    pub kind: String,
    #[serde(default = "unit_scale")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_cdf: Option<BaseCdf>,
}

fn unit_scale() -> f64 {
    1.0
}

/// A weight or ψ entry: a JSON number or a decimal string (`"-inf"` allowed for ψ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecimalEntry {
    Number(f64),
    Text(String),
}

impl DecimalEntry {
    fn value(&self) -> Result<f64> {
        match self {
            DecimalEntry::Number(v) => Ok(*v),
            DecimalEntry::Text(s) => match s.trim() {
                "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
                t => t
                    .parse()
                    .map_err(|_| Error::InvalidPattern(format!("not a number: {s:?}"))),
            },
        }
    }
}

/// `{"K": ..., "weights": [...]}` or `{"K": ..., "psi": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternDescriptor {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<DecimalEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<DecimalEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub link: LinkDescriptor,
    pub pattern: PatternDescriptor,
}

/// 17 significant digits: enough for any f64 to parse back bit-exactly.
pub fn exact_decimal(v: f64) -> String {
    format!("{v:.16e}")
}

impl TryFrom<&StrengthLink> for LinkDescriptor {
    type Error = Error;

    fn try_from(link: &StrengthLink) -> Result<Self> {
        let (kind, base_cdf) = match link.kind() {
            LinkKind::Cubic => ("cubic", None),
            LinkKind::Identity => ("identity", None),
            LinkKind::TanhSigmoid => ("tanh-sigmoid", None),
            LinkKind::LogitOfCdf(b) => ("logit-of-cdf", Some(*b)),
            LinkKind::Custom(c) => {
                return Err(Error::domain(format!(
                    "custom link {:?} has no serializable form",
                    c.name()
                )))
            }
        };
        Ok(LinkDescriptor {
            kind: kind.into(),
            scale: link.scale(),
            base_cdf,
        })
    }
}

impl TryFrom<&LinkDescriptor> for StrengthLink {
    type Error = Error;

    fn try_from(d: &LinkDescriptor) -> Result<Self> {
        let link = match (d.kind.as_str(), d.base_cdf) {
            ("cubic", None) => StrengthLink::cubic(),
            ("identity", None) => StrengthLink::identity(),
            ("tanh-sigmoid", None) => StrengthLink::tanh_sigmoid(),
            ("logit-of-cdf", Some(b)) => StrengthLink::logit_of_cdf(b),
            ("logit-of-cdf", None) => {
                return Err(Error::domain("logit-of-cdf link needs base_cdf"))
            }
            (k, Some(_)) if k != "logit-of-cdf" => {
                return Err(Error::domain(format!("base_cdf is not valid for {k:?}")))
            }
            (k, _) => return Err(Error::domain(format!("unknown link kind {k:?}"))),
        };
        link.with_scale(d.scale)
    }
}

impl From<&PatternDistribution> for PatternDescriptor {
    fn from(p: &PatternDistribution) -> Self {
        PatternDescriptor {
            k: p.k(),
            weights: Some(
                p.weights()
                    .iter()
                    .map(|w| DecimalEntry::Text(exact_decimal(*w)))
                    .collect(),
            ),
            psi: None,
        }
    }
}

impl TryFrom<&PatternDescriptor> for PatternDistribution {
    type Error = Error;

    fn try_from(d: &PatternDescriptor) -> Result<Self> {
        let parse = |v: &[DecimalEntry]| -> Result<Vec<f64>> {
            if v.len() != d.k {
                return Err(Error::InvalidPattern(format!(
                    "K={} but {} entries given",
                    d.k,
                    v.len()
                )));
            }
            v.iter().map(DecimalEntry::value).collect()
        };
        match (&d.weights, &d.psi) {
            (Some(w), None) => {
                let w = parse(w)?;
                let normalized = PatternDistribution::from_weights(w.clone())?;
                let total: f64 = w.iter().sum();
                // Already-normalized weights keep their exact bits.
                if (total - 1.0).abs() <= 1e-12 {
                    Ok(PatternDistribution::from_normalized_unchecked(w))
                } else {
                    Ok(normalized)
                }
            }
            (None, Some(psi)) => PatternDistribution::from_psi(&parse(psi)?),
            _ => Err(Error::InvalidPattern(
                "pattern needs exactly one of `weights` or `psi`".into(),
            )),
        }
    }
}

impl TryFrom<&OrdinalModel> for ModelDescriptor {
    type Error = Error;

    fn try_from(m: &OrdinalModel) -> Result<Self> {
        Ok(ModelDescriptor {
            link: m.link().try_into()?,
            pattern: m.pattern().into(),
        })
    }
}

impl TryFrom<&ModelDescriptor> for OrdinalModel {
    type Error = Error;

    fn try_from(d: &ModelDescriptor) -> Result<Self> {
        Ok(OrdinalModel::new(
            (&d.link).try_into()?,
            (&d.pattern).try_into()?,
        ))
    }
}

impl OrdinalModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDescriptor::try_from(self)?)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: ModelDescriptor = serde_json::from_str(text)?;
        (&d).try_into()
    }
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`
/// (plain JSON has no representation for them).
pub mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn descriptor_round_trip() {
        let m = OrdinalModel::new(
            StrengthLink::thurstone_mosteller(),
            PatternDistribution::abs_decay(4, 0.37).unwrap(),
        );
        let json = m.to_json().unwrap();
        let back = OrdinalModel::from_json(&json).unwrap();
        assert_eq!(back.pattern(), m.pattern());
        assert_eq!(back.link().label(), m.link().label());
    }

    #[test]
    fn psi_form_with_neg_inf() {
        let json = r#"{"link":{"kind":"identity"},
                       "pattern":{"K":3,"psi":[0, "-inf", -1.5]}}"#;
        let m = OrdinalModel::from_json(json).unwrap();
        assert_eq!(m.pattern().weight(2), 0.0);
        assert_eq!(m.link().scale(), 1.0);
    }

    #[test]
    fn descriptor_errors() {
        let bad = [
            r#"{"link":{"kind":"logit-of-cdf"},"pattern":{"K":1,"weights":[1]}}"#,
            r#"{"link":{"kind":"identity","base_cdf":"logistic"},"pattern":{"K":1,"weights":[1]}}"#,
            r#"{"link":{"kind":"identity"},"pattern":{"K":2,"weights":[1]}}"#,
            r#"{"link":{"kind":"identity"},"pattern":{"K":1}}"#,
            r#"{"link":{"kind":"identity","scale":0},"pattern":{"K":1,"weights":[1]}}"#,
        ];
        for b in bad {
            assert!(OrdinalModel::from_json(b).is_err(), "{b}");
        }
        let custom = OrdinalModel::new(
            StrengthLink::custom("cbrt", f64::cbrt).unwrap(),
            PatternDistribution::uniform(2).unwrap(),
        );
        assert!(custom.to_json().is_err());
    }

    proptest! {
        #[test]
        fn weights_round_trip_bit_exact(raw in prop::collection::vec(0.0f64..1.0, 1..9)) {
            prop_assume!(raw.iter().any(|w| *w > 0.0));
            let p = PatternDistribution::from_weights(raw).unwrap();
            let json = serde_json::to_string(&PatternDescriptor::from(&p)).unwrap();
            let d: PatternDescriptor = serde_json::from_str(&json).unwrap();
            let back = PatternDistribution::try_from(&d).unwrap();
            for (a, b) in p.weights().iter().zip(back.weights()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
