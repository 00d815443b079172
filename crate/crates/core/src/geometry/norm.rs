use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Vector;
use crate::error::{Error, Result};

/// The ambient norm of `R^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmbientNorm {
    L1,
    L2,
    Linf,
    /// `l_p` with `1 < p < inf`.
    Lp(f64),
}

impl AmbientNorm {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::invalid(format!(
                "l_p norm needs finite p > 1, got {p}"
            )));
        }
        Ok(if p == 2.0 {
            AmbientNorm::L2
        } else {
            AmbientNorm::Lp(p)
        })
    }

    /// The exponent `p`, with `inf` for the sup norm.
    pub fn exponent(self) -> f64 {
        match self {
            AmbientNorm::L1 => 1.0,
            AmbientNorm::L2 => 2.0,
            AmbientNorm::Linf => f64::INFINITY,
            AmbientNorm::Lp(p) => p,
        }
    }

    /// Norm with the conjugate exponent.
    pub fn dual(self) -> AmbientNorm {
        match self {
            AmbientNorm::L1 => AmbientNorm::Linf,
            AmbientNorm::Linf => AmbientNorm::L1,
            AmbientNorm::L2 => AmbientNorm::L2,
            AmbientNorm::Lp(p) => AmbientNorm::Lp(p / (p - 1.0)),
        }
    }

    pub fn eval(self, coords: &[f64]) -> f64 {
        match self {
            AmbientNorm::L1 => coords.iter().map(|x| x.abs()).sum(),
            AmbientNorm::L2 => coords.iter().map(|x| x * x).sum::<f64>().sqrt(),
            AmbientNorm::Linf => coords.iter().map(|x| x.abs()).fold(0.0, f64::max),
            AmbientNorm::Lp(p) => {
                // Scale by the max entry so large exponents do not overflow.
                let m = coords.iter().map(|x| x.abs()).fold(0.0, f64::max);
                if m == 0.0 {
                    return 0.0;
                }
                m * coords
                    .iter()
                    .map(|x| (x.abs() / m).powf(p))
                    .sum::<f64>()
                    .powf(1.0 / p)
            }
        }
    }

    pub fn distance(self, a: &Vector, b: &Vector) -> f64 {
        match self {
            AmbientNorm::L2 => a
                .coords()
                .iter()
                .zip(b.coords())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            AmbientNorm::Linf => a.sup_distance(b),
            _ => self.eval((a - b).coords()),
        }
    }
}

/// `||v||` under `norm`.
pub fn norm_value(v: &Vector, norm: AmbientNorm) -> f64 {
    norm.eval(v.coords())
}

impl fmt::Display for AmbientNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbientNorm::L1 => write!(f, "l1"),
            AmbientNorm::L2 => write!(f, "l2"),
            AmbientNorm::Linf => write!(f, "linf"),
            AmbientNorm::Lp(p) => write!(f, "l{p}"),
        }
    }
}

impl std::str::FromStr for AmbientNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(AmbientNorm::L1),
            "l2" => Ok(AmbientNorm::L2),
            "linf" | "inf" => Ok(AmbientNorm::Linf),
            other => {
                let p = other
                    .strip_prefix('l')
                    .unwrap_or(other)
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("unknown norm {s:?}")))?;
                AmbientNorm::lp(p)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NormRepr {
    Name(String),
    Lp { lp: f64 },
}

impl Serialize for AmbientNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AmbientNorm::Lp(p) => NormRepr::Lp { lp: *p },
            other => NormRepr::Name(other.to_string()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AmbientNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NormRepr::deserialize(d)? {
            NormRepr::Name(n) if n == "l1" || n == "l2" || n == "linf" => {
                n.parse().map_err(serde::de::Error::custom)
            }
            NormRepr::Name(n) => Err(serde::de::Error::custom(format!(
                "norm must be \"l1\", \"l2\", \"linf\" or {{\"lp\": p}}, got {n:?}"
            ))),
            NormRepr::Lp { lp } => AmbientNorm::lp(lp).map_err(serde::de::Error::custom),
        }
    }
}
