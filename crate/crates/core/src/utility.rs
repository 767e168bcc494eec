//! Increasing continuous transforms used inside tail quasi-linear means.
//!
//! The catalogue is closed: every kind has an analytic generalized inverse
//! `U^{-1}(y) = inf{x : U(x) >= y}`, so no measure pays for a numeric
//! inversion.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, RiskError};

/// A point of the extended real line.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::NegInfinity => f64::NEG_INFINITY,
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else if v == f64::NEG_INFINITY {
            ExtendedReal::NegInfinity
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

/// Curvature class of a utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    /// Both concave and convex.
    Linear,
    Concave,
    Convex,
}

impl Curvature {
    pub fn is_concave(self) -> bool {
        matches!(self, Curvature::Linear | Curvature::Concave)
    }

    pub fn is_convex(self) -> bool {
        matches!(self, Curvature::Linear | Curvature::Convex)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UtilityFunction {
    /// `U(x) = x`
    Linear,
    /// `U(x) = e^{gamma x} / gamma`
    Exponential { gamma: f64 },
    /// `U(x) = x^gamma / gamma` on `x > 0`
    Power { gamma: f64 },
    /// `U(x) = ln x` on `x > 0`
    Logarithmic,
    /// `U(x) = min(x, cap)`
    Capped { cap: f64 },
}

impl UtilityFunction {
    pub fn exponential(gamma: f64) -> Result<Self> {
        nonzero_finite(gamma, "exponential")?;
        Ok(UtilityFunction::Exponential { gamma })
    }

    pub fn power(gamma: f64) -> Result<Self> {
        nonzero_finite(gamma, "power")?;
        Ok(UtilityFunction::Power { gamma })
    }

    pub fn capped(cap: f64) -> Result<Self> {
        if !cap.is_finite() {
            return Err(RiskError::Parameter(format!("cap must be finite, got {cap}")));
        }
        Ok(UtilityFunction::Capped { cap })
    }

    /// Lower end of the domain (exclusive for power and log kinds).
    pub fn domain_lower(&self) -> f64 {
        match self {
            UtilityFunction::Power { .. } | UtilityFunction::Logarithmic => 0.0,
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn in_domain(&self, x: f64) -> bool {
        match self {
            UtilityFunction::Power { .. } | UtilityFunction::Logarithmic => x > 0.0,
            _ => !x.is_nan(),
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !self.in_domain(x) {
            return Err(RiskError::Domain(format!("{self} is undefined at x = {x}")));
        }
        Ok(match *self {
            UtilityFunction::Linear => x,
            UtilityFunction::Exponential { gamma } => (gamma * x).exp() / gamma,
            UtilityFunction::Power { gamma } => x.powf(gamma) / gamma,
            UtilityFunction::Logarithmic => x.ln(),
            UtilityFunction::Capped { cap } => x.min(cap),
        })
    }

    /// `inf{x : U(x) >= y}` over the domain.
    pub fn generalized_inverse(&self, y: f64) -> ExtendedReal {
        use ExtendedReal::*;
        if y.is_nan() {
            return Finite(f64::NAN);
        }
        match *self {
            UtilityFunction::Linear => y.into(),
            UtilityFunction::Exponential { gamma } => {
                // range is (0, inf) for gamma > 0 and (-inf, 0) for gamma < 0
                let t = gamma * y;
                if gamma > 0.0 && y <= 0.0 {
                    NegInfinity
                } else if gamma < 0.0 && y >= 0.0 {
                    PosInfinity
                } else {
                    (t.ln() / gamma).into()
                }
            }
            UtilityFunction::Power { gamma } => {
                if gamma > 0.0 && y <= 0.0 {
                    Finite(0.0)
                } else if gamma < 0.0 && y >= 0.0 {
                    PosInfinity
                } else {
                    (gamma * y).powf(1.0 / gamma).into()
                }
            }
            UtilityFunction::Logarithmic => y.exp().into(),
            UtilityFunction::Capped { cap } => {
                if y > cap {
                    PosInfinity
                } else {
                    y.into()
                }
            }
        }
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        if !self.in_domain(x) {
            return Err(RiskError::Domain(format!("{self} is undefined at x = {x}")));
        }
        match *self {
            UtilityFunction::Linear => Ok(1.0),
            UtilityFunction::Exponential { gamma } => Ok((gamma * x).exp()),
            UtilityFunction::Power { gamma } => Ok(x.powf(gamma - 1.0)),
            UtilityFunction::Logarithmic => Ok(1.0 / x),
            UtilityFunction::Capped { cap } => {
                if x < cap {
                    Ok(1.0)
                } else if x > cap {
                    Ok(0.0)
                } else {
                    Err(RiskError::Differentiability(format!(
                        "capped utility has a kink at {cap}"
                    )))
                }
            }
        }
    }

    /// Arrow–Pratt coefficient `-U''(x) / U'(x)`.
    pub fn risk_aversion(&self, x: f64) -> Result<f64> {
        if !self.in_domain(x) {
            return Err(RiskError::Domain(format!("{self} is undefined at x = {x}")));
        }
        match *self {
            UtilityFunction::Linear => Ok(0.0),
            UtilityFunction::Exponential { gamma } => Ok(-gamma),
            UtilityFunction::Power { gamma } => Ok((1.0 - gamma) / x),
            UtilityFunction::Logarithmic => Ok(1.0 / x),
            UtilityFunction::Capped { cap } => {
                if x < cap {
                    Ok(0.0)
                } else {
                    // at the cap U has a kink; above it U' vanishes
                    Err(RiskError::Differentiability(format!(
                        "capped utility has no risk-aversion coefficient at x = {x} (cap {cap})"
                    )))
                }
            }
        }
    }

    pub fn curvature(&self) -> Curvature {
        match *self {
            UtilityFunction::Linear => Curvature::Linear,
            UtilityFunction::Exponential { gamma } if gamma > 0.0 => Curvature::Convex,
            UtilityFunction::Exponential { .. } => Curvature::Concave,
            UtilityFunction::Power { gamma } if gamma > 1.0 => Curvature::Convex,
            UtilityFunction::Power { gamma } if gamma < 1.0 => Curvature::Concave,
            UtilityFunction::Power { .. } => Curvature::Linear,
            UtilityFunction::Logarithmic | UtilityFunction::Capped { .. } => Curvature::Concave,
        }
    }

    /// True when `U` is strictly increasing on its whole domain.
    pub fn is_strictly_increasing(&self) -> bool {
        !matches!(self, UtilityFunction::Capped { .. })
    }
}

fn nonzero_finite(gamma: f64, kind: &str) -> Result<()> {
    if gamma.is_finite() && gamma != 0.0 {
        Ok(())
    } else {
        Err(RiskError::Parameter(format!(
            "{kind} utility needs a finite nonzero gamma, got {gamma}"
        )))
    }
}

impl fmt::Display for UtilityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilityFunction::Linear => write!(f, "linear"),
            UtilityFunction::Exponential { gamma } => write!(f, "exp:{gamma}"),
            UtilityFunction::Power { gamma } => write!(f, "pow:{gamma}"),
            UtilityFunction::Logarithmic => write!(f, "log"),
            UtilityFunction::Capped { cap } => write!(f, "cap:{cap}"),
        }
    }
}

fn parse_decimal(s: &str, what: &str) -> Result<f64> {
    let s = s.trim();
    let ok = !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    match s.parse::<f64>() {
        Ok(v) if ok && v.is_finite() => Ok(v),
        _ => Err(RiskError::Parse(format!("invalid {what} literal '{s}'"))),
    }
}

impl FromStr for UtilityFunction {
    type Err = RiskError;

    /// Grammar: `linear`, `exp:<gamma>`, `pow:<gamma>`, `log`, `cap:<level>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            None => match s {
                "linear" => Ok(UtilityFunction::Linear),
                "log" => Ok(UtilityFunction::Logarithmic),
                _ => Err(RiskError::Parse(format!("unknown utility '{s}'"))),
            },
            Some((kind, arg)) => {
                let value = parse_decimal(arg, kind)?;
                let built = match kind.trim() {
                    "exp" => UtilityFunction::exponential(value),
                    "pow" => UtilityFunction::power(value),
                    "cap" => UtilityFunction::capped(value),
                    _ => return Err(RiskError::Parse(format!("unknown utility '{s}'"))),
                };
                built.map_err(|e| RiskError::Parse(e.to_string()))
            }
        }
    }
}
