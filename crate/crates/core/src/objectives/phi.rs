use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Concave, strictly increasing transform applied to group utilities.
///
/// The family is closed so that derivatives and inverses are available in
/// closed form. `RawlsLimit` is not a pointwise transform: it stands for the
/// max-min aggregate and is only meaningful for whole welfare evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "String", try_from = "String"))]
pub enum PhiFunction {
    Identity,
    /// `u^α` for `α ∈ (0, 1]`, defined for `u ≥ 0`.
    Power {
        exponent: f64,
    },
    /// `ln(u + s)` for `s > 0`, defined for `u > -s`.
    Log {
        shift: f64,
    },
    /// `-u^{-γ}` for `γ > 0`, defined for `u > 0`.
    NegativePower {
        gamma: f64,
    },
    RawlsLimit,
}

impl PhiFunction {
    pub fn power(exponent: f64) -> Result<Self> {
        Self::Power { exponent }.validated()
    }

    pub fn log(shift: f64) -> Result<Self> {
        Self::Log { shift }.validated()
    }

    pub fn negative_power(gamma: f64) -> Result<Self> {
        Self::NegativePower { gamma }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            PhiFunction::Identity | PhiFunction::RawlsLimit => true,
            PhiFunction::Power { exponent } => exponent > 0.0 && exponent <= 1.0,
            PhiFunction::Log { shift } => shift > 0.0 && shift.is_finite(),
            PhiFunction::NegativePower { gamma } => gamma > 0.0 && gamma.is_finite(),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::Config(format!("invalid parameter for {self}")))
        }
    }

    pub fn is_rawls(&self) -> bool {
        matches!(self, PhiFunction::RawlsLimit)
    }

    /// Linear members of the family (identity, and power with exponent 1).
    pub fn is_linear(&self) -> bool {
        match self {
            PhiFunction::Identity => true,
            PhiFunction::Power { exponent } => *exponent == 1.0,
            _ => false,
        }
    }

    /// Lower end of the admissible utility domain and whether it is included.
    pub fn domain_min(&self) -> (f64, bool) {
        match self {
            PhiFunction::Identity | PhiFunction::RawlsLimit => (f64::NEG_INFINITY, false),
            PhiFunction::Power { .. } => (0.0, true),
            PhiFunction::Log { shift } => (-shift, false),
            PhiFunction::NegativePower { .. } => (0.0, false),
        }
    }

    pub fn admits(&self, u: f64) -> bool {
        if !u.is_finite() {
            return false;
        }
        let (lo, inclusive) = self.domain_min();
        u > lo || (inclusive && u == lo)
    }

    fn domain_error(&self, u: f64) -> Error {
        Error::Domain {
            phi: self.to_string(),
            value: u,
            group: None,
        }
    }

    pub fn evaluate(&self, u: f64) -> Result<f64> {
        if self.is_rawls() {
            return Err(Error::Unsupported(
                "the Rawls limit is an aggregate, not a pointwise transform".into(),
            ));
        }
        if !self.admits(u) {
            return Err(self.domain_error(u));
        }
        Ok(match *self {
            PhiFunction::Identity => u,
            PhiFunction::Power { exponent } => libm::pow(u, exponent),
            PhiFunction::Log { shift } => libm::log(u + shift),
            PhiFunction::NegativePower { gamma } => -libm::pow(u, -gamma),
            PhiFunction::RawlsLimit => unreachable!(),
        })
    }

    /// φ'(u). Infinite at the boundary of the power family when `α < 1`.
    pub fn derivative(&self, u: f64) -> Result<f64> {
        if self.is_rawls() {
            return Err(Error::Unsupported("the Rawls limit has no derivative".into()));
        }
        if !self.admits(u) {
            return Err(self.domain_error(u));
        }
        Ok(match *self {
            PhiFunction::Identity => 1.0,
            PhiFunction::Power { exponent } => {
                if exponent == 1.0 {
                    1.0
                } else {
                    exponent * libm::pow(u, exponent - 1.0)
                }
            }
            PhiFunction::Log { shift } => 1.0 / (u + shift),
            PhiFunction::NegativePower { gamma } => gamma * libm::pow(u, -gamma - 1.0),
            PhiFunction::RawlsLimit => unreachable!(),
        })
    }

    /// φ⁻¹(w). The Rawls limit aggregates in utility units, so its inverse is
    /// the identity.
    pub fn inverse(&self, w: f64) -> Result<f64> {
        let out_of_range = || Error::Domain {
            phi: self.to_string(),
            value: w,
            group: None,
        };
        if !w.is_finite() {
            return Err(out_of_range());
        }
        match *self {
            PhiFunction::Identity | PhiFunction::RawlsLimit => Ok(w),
            PhiFunction::Power { exponent } => {
                if w < 0.0 {
                    Err(out_of_range())
                } else {
                    Ok(libm::pow(w, 1.0 / exponent))
                }
            }
            PhiFunction::Log { shift } => Ok(libm::exp(w) - shift),
            PhiFunction::NegativePower { gamma } => {
                if w >= 0.0 {
                    Err(out_of_range())
                } else {
                    Ok(libm::pow(-w, -1.0 / gamma))
                }
            }
        }
    }
}

impl fmt::Display for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiFunction::Identity => f.write_str("identity"),
            PhiFunction::Power { exponent } => write!(f, "power:{exponent}"),
            PhiFunction::Log { shift } => write!(f, "log:{shift}"),
            PhiFunction::NegativePower { gamma } => write!(f, "negpow:{gamma}"),
            PhiFunction::RawlsLimit => f.write_str("rawls"),
        }
    }
}

impl FromStr for PhiFunction {
    type Err = Error;

    /// Parses `identity`, `power:<α>`, `log:<shift>`, `negpow:<γ>` or `rawls`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, param) = match s.split_once(':') {
            Some((f, p)) => (f, Some(p)),
            None => (s, None),
        };
        let number = |p: Option<&str>| -> Result<f64> {
            let p = p.ok_or_else(|| Error::Config(format!("φ spec {s:?} needs a parameter")))?;
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("φ spec {s:?} has a non-numeric parameter")))
        };
        let no_param = |phi: PhiFunction| match param {
            None => Ok(phi),
            Some(_) => Err(Error::Config(format!("φ spec {s:?} takes no parameter"))),
        };
        match family {
            "identity" => no_param(PhiFunction::Identity),
            "rawls" => no_param(PhiFunction::RawlsLimit),
            "power" => PhiFunction::power(number(param)?),
            "log" => PhiFunction::log(number(param)?),
            "negpow" => PhiFunction::negative_power(number(param)?),
            _ => Err(Error::Config(format!(
                "unknown φ family {family:?}; expected identity, power:<α>, log:<shift>, negpow:<γ> or rawls"
            ))),
        }
    }
}

impl From<PhiFunction> for String {
    fn from(phi: PhiFunction) -> String {
        phi.to_string()
    }
}

impl TryFrom<String> for PhiFunction {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}
