//! Parameter and initial-state types for the ACD(1,1) recursion
//! `psi_i = omega + alpha * x_{i-1} + beta * psi_{i-1}`.

use serde::{Deserialize, Serialize};

use crate::error::{AcdError, Result};

/// The parameter triple `(omega, alpha, beta)`.
///
/// The estimable space is the open positive orthant. [`AcdParams::new`]
/// enforces that; [`AcdParams::relaxed`] admits `alpha = 0` or `beta = 0`
/// for analytic boundary fixtures and must not be fed to the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcdParams {
    omega: f64,
    alpha: f64,
    beta: f64,
}

fn check(name: &'static str, value: f64, allow_zero: bool) -> Result<()> {
    if !value.is_finite() {
        return Err(AcdError::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    let ok = if allow_zero { value >= 0.0 } else { value > 0.0 };
    if !ok {
        return Err(AcdError::InvalidParameter {
            name,
            value,
            reason: if allow_zero {
                "must be non-negative"
            } else {
                "must be strictly positive"
            },
        });
    }
    Ok(())
}

impl AcdParams {
    pub fn new(omega: f64, alpha: f64, beta: f64) -> Result<Self> {
        check("omega", omega, false)?;
        check("alpha", alpha, false)?;
        check("beta", beta, false)?;
        Ok(Self { omega, alpha, beta })
    }

    /// Boundary constructor: `omega > 0`, `alpha >= 0`, `beta >= 0`.
    pub fn relaxed(omega: f64, alpha: f64, beta: f64) -> Result<Self> {
        check("omega", omega, false)?;
        check("alpha", alpha, true)?;
        check("beta", beta, true)?;
        Ok(Self { omega, alpha, beta })
    }

    pub fn from_array(theta: [f64; 3]) -> Result<Self> {
        Self::new(theta[0], theta[1], theta[2])
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.omega, self.alpha, self.beta]
    }

    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta
    }

    pub fn finite_mean(&self) -> bool {
        self.persistence() < 1.0
    }

    /// True when both `alpha` and `beta` are strictly positive.
    pub fn is_strict(&self) -> bool {
        self.alpha > 0.0 && self.beta > 0.0
    }
}

/// Unconditional mean duration `omega / (1 - alpha - beta)`.
pub fn stationary_mean(params: &AcdParams) -> Result<f64> {
    if !params.finite_mean() {
        return Err(AcdError::InfiniteMean {
            persistence: params.persistence(),
        });
    }
    Ok(params.omega / (1.0 - params.persistence()))
}

/// Starting values `(x_0, psi_0)` of the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    x0: f64,
    psi0: f64,
}

impl InitialState {
    pub fn new(x0: f64, psi0: f64) -> Result<Self> {
        check("x0", x0, false)?;
        check("psi0", psi0, false)?;
        Ok(Self { x0, psi0 })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    /// `x0 = psi0 = stationary_mean` for finite-mean parameters, else `omega`.
    pub fn default_for(params: &AcdParams) -> Self {
        let level = stationary_mean(params).unwrap_or(params.omega);
        Self { x0: level, psi0: level }
    }
}
