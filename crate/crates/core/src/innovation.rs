//! Unit-mean innovation laws.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Exp1, Gamma, Weibull};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{AcdError, Result};
use crate::rng::RandomStream;

/// A positive innovation distribution rescaled to mean one.
///
/// Weibull(k) uses scale `1/Γ(1+1/k)`; Gamma(a) uses scale `1/a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum InnovationLaw {
    Exponential,
    Weibull { shape: f64 },
    Gamma { shape: f64 },
}

impl InnovationLaw {
    pub fn weibull(shape: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(AcdError::InvalidParameter {
                name: "weibull shape",
                value: shape,
                reason: "must be finite and > 0",
            });
        }
        Ok(Self::Weibull { shape })
    }

    pub fn gamma(shape: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(AcdError::InvalidParameter {
                name: "gamma shape",
                value: shape,
                reason: "must be finite and > 0",
            });
        }
        Ok(Self::Gamma { shape })
    }

    /// `E[eps^2]`, which exceeds 1 for every supported family.
    pub fn second_moment(&self) -> f64 {
        match *self {
            Self::Exponential => 2.0,
            Self::Weibull { shape } => {
                let g1 = gamma(1.0 + 1.0 / shape);
                gamma(1.0 + 2.0 / shape) / (g1 * g1)
            }
            Self::Gamma { shape } => 1.0 + 1.0 / shape,
        }
    }

    pub fn variance(&self) -> f64 {
        self.second_moment() - 1.0
    }

    pub fn sampler(&self) -> InnovationSampler {
        let inner = match *self {
            Self::Exponential => SamplerKind::Exponential,
            Self::Weibull { shape } => {
                let scale = 1.0 / gamma(1.0 + 1.0 / shape);
                SamplerKind::Weibull(Weibull::new(scale, shape).expect("validated weibull shape"))
            }
            Self::Gamma { shape } => SamplerKind::Gamma(Gamma::new(shape, 1.0 / shape).expect("validated gamma shape")),
        };
        InnovationSampler { inner }
    }
}

impl fmt::Display for InnovationLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential => write!(f, "exponential"),
            Self::Weibull { shape } => write!(f, "weibull:{shape}"),
            Self::Gamma { shape } => write!(f, "gamma:{shape}"),
        }
    }
}

impl FromStr for InnovationLaw {
    type Err = AcdError;

    /// Parses `exponential`, `weibull:k` or `gamma:a`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || AcdError::InvalidConfig(format!("unknown innovation law '{s}'"));
        let (family, arg) = match s.split_once(':') {
            Some((f, a)) => (f, Some(a)),
            None => (s, None),
        };
        match (family, arg) {
            ("exponential", None) => Ok(Self::Exponential),
            ("weibull", Some(a)) => Self::weibull(a.parse().map_err(|_| bad())?),
            ("gamma", Some(a)) => Self::gamma(a.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Exponential,
    Weibull(Weibull<f64>),
    Gamma(Gamma<f64>),
}

/// Prepared sampler for one law; cheap to clone.
#[derive(Debug, Clone)]
pub struct InnovationSampler {
    inner: SamplerKind,
}

impl InnovationSampler {
    pub fn draw(&self, rng: &mut RandomStream) -> f64 {
        loop {
            let e: f64 = match &self.inner {
                SamplerKind::Exponential => Exp1.sample(rng),
                SamplerKind::Weibull(d) => d.sample(rng),
                SamplerKind::Gamma(d) => d.sample(rng),
            };
            // Underflow to zero is possible for tiny Gamma shapes.
            if e > 0.0 {
                return e;
            }
        }
    }
}

/// One innovation draw from `law`.
pub fn draw_innovation(law: &InnovationLaw, rng: &mut RandomStream) -> f64 {
    law.sampler().draw(rng)
}
