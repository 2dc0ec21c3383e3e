use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::strong::check_strong_triangle;
use crate::metric::DistanceMatrix;
use crate::{Error, Result};

/// Closed family of continuous, nondecreasing maps with `f(0) = 0`. Applying
/// any member entrywise to an ultrametric yields an ultrametric.
///
/// Text form: `identity`, `pow:α`, `scale:c`, `min:c`, and compositions joined
/// with `,` applied left to right (`pow:2,min:1.5` squares, then saturates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// `λ ↦ λ^α`, `α > 0`.
    Power {
        exponent: f64,
    },
    /// `λ ↦ c·λ`, `c > 0`.
    Scale {
        factor: f64,
    },
    /// `λ ↦ min(λ, c)`, `c > 0`.
    Saturate {
        cap: f64,
    },
    /// Applied first to last.
    Compose {
        steps: Vec<Transform>,
    },
}

impl Transform {
    /// Rejects parameters outside the family (non-positive or non-finite).
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::UnsupportedTransform(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        match self {
            Transform::Identity => Ok(()),
            Transform::Power { exponent } => positive("exponent", *exponent),
            Transform::Scale { factor } => positive("scale factor", *factor),
            Transform::Saturate { cap } => positive("saturation cap", *cap),
            Transform::Compose { steps } => steps.iter().try_for_each(Transform::validate),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Power { exponent } => x.powf(*exponent),
            Transform::Scale { factor } => factor * x,
            Transform::Saturate { cap } => x.min(*cap),
            Transform::Compose { steps } => steps.iter().fold(x, |acc, t| t.apply(acc)),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Identity => write!(f, "identity"),
            Transform::Power { exponent } => write!(f, "pow:{exponent}"),
            Transform::Scale { factor } => write!(f, "scale:{factor}"),
            Transform::Saturate { cap } => write!(f, "min:{cap}"),
            Transform::Compose { steps } => {
                for (i, s) in steps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_one = |part: &str| -> Result<Transform> {
            let part = part.trim();
            let (name, arg) = match part.split_once(':') {
                Some((n, a)) => (n.trim(), Some(a.trim())),
                None => (part, None),
            };
            let value = || -> Result<f64> {
                let a = arg.ok_or_else(|| Error::UnsupportedTransform(format!("`{name}` needs a parameter")))?;
                a.parse::<f64>()
                    .map_err(|_| Error::UnsupportedTransform(format!("bad parameter `{a}` for `{name}`")))
            };
            let t = match name {
                "identity" | "id" if arg.is_none() => Transform::Identity,
                "pow" | "power" => Transform::Power { exponent: value()? },
                "scale" => Transform::Scale { factor: value()? },
                "min" | "saturate" => Transform::Saturate { cap: value()? },
                _ => return Err(Error::UnsupportedTransform(format!("unknown transform `{part}`"))),
            };
            t.validate()?;
            Ok(t)
        };
        let mut steps = s.split(',').map(parse_one).collect::<Result<Vec<_>>>()?;
        Ok(if steps.len() == 1 {
            steps.remove(0)
        } else {
            Transform::Compose { steps }
        })
    }
}

/// Applies `f` entrywise to an ultrametric matrix.
///
/// The input must satisfy the strong triangle inequality within
/// `1e-12·max_entry`; otherwise [`Error::NotUltrametric`] is returned.
pub fn transform_metric(m: &DistanceMatrix, f: &Transform) -> Result<DistanceMatrix> {
    f.validate()?;
    let report = check_strong_triangle(m, 1e-12 * m.max_entry())?;
    if let Some(worst) = report.worst {
        return Err(Error::NotUltrametric(worst));
    }
    Ok(m.map(|v| f.apply(v)))
}
