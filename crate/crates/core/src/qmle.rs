//! Exponential QMLE of `(omega, alpha, beta)` and its sandwich covariances.
//!
//! The negative log-likelihood is minimized by Newton's method using the
//! analytic gradient and Hessian from [`crate::filter`]. Indefinite Hessians
//! are repaired by flooring the absolute eigenvalues, and every step is
//! backtracked until the Armijo condition holds, so accepted iterates never
//! increase the objective. By default the search runs in `ln(theta)`, which
//! keeps the iterates in the positive orthant without explicit constraints.
//!
//! Convergence is measured by the sup-norm of the average gradient
//! `score_sum / n` in the original parameterization, so the tolerance means
//! the same thing in both search spaces.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{AcdError, Result};
use crate::filter::{evaluate, neg_loglik, normalized_omegas, InitStrategy, ScoreInfo};
use crate::params::{AcdParams, InitialState};
use crate::simulate::DurationSeries;
use crate::stats::symmetrize;

pub const DEFAULT_CONDITION_CAP: f64 = 1e12;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reparam {
    #[default]
    LogParams,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub init_strategy: InitStrategy,
    pub theta_start: Option<AcdParams>,
    pub reparam: Reparam,
    pub min_observations: usize,
    pub condition_cap: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tolerance: 1e-8,
            init_strategy: InitStrategy::SampleMean,
            theta_start: None,
            reparam: Reparam::LogParams,
            min_observations: 10,
            condition_cap: DEFAULT_CONDITION_CAP,
        }
    }
}

impl EstimateOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_tolerance > 0.0) {
            return Err(AcdError::InvalidConfig(format!(
                "gradient tolerance must be > 0, got {}",
                self.gradient_tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(AcdError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if !(self.condition_cap > 1.0) {
            return Err(AcdError::InvalidConfig("condition cap must exceed 1".into()));
        }
        Ok(())
    }
}

/// Conventional start `(0.1 * mean, 0.1, 0.8)`.
pub fn default_start(durations: &[f64]) -> Result<AcdParams> {
    let mean = durations.iter().sum::<f64>() / durations.len() as f64;
    AcdParams::new(0.1 * mean, 0.1, 0.8)
}

/// Sandwich covariance under the per-observation and per-time normalizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    /// Asymptotic covariance of `sqrt(n) (theta_hat - theta_0)`.
    pub cov_per_obs: Matrix3<f64>,
    /// Asymptotic covariance of `sqrt(T) (theta_hat - theta_0)`.
    pub cov_per_time: Matrix3<f64>,
    /// `sqrt(diag(cov_per_obs) / n)`.
    pub std_errors: Vector3<f64>,
    /// `sqrt(diag(cov_per_time) / T)`.
    pub std_errors_per_time: Vector3<f64>,
    /// `|n * mu_hat / T - 1|`, the allowed disagreement between the two.
    pub coherence_gap: f64,
    pub condition_number: f64,
}

fn condition_number(m: &Matrix3<f64>) -> (f64, f64) {
    let eig = m.symmetric_eigenvalues();
    let min = eig.min();
    let max_abs = eig.amax();
    let cond = if min > 0.0 { max_abs / min } else { f64::INFINITY };
    (cond, min)
}

/// `cov_per_obs = I^-1 S I^-1` and `cov_per_time = mu_hat * cov_per_obs`.
pub fn sandwich_covariances(
    omega_s: &Matrix3<f64>,
    omega_i: &Matrix3<f64>,
    n: usize,
    horizon: f64,
    mu_hat: f64,
    condition_cap: f64,
) -> Result<Sandwich> {
    if n == 0 || !(horizon > 0.0) || !(mu_hat > 0.0) {
        return Err(AcdError::InvalidConfig(format!(
            "sandwich needs n >= 1, T > 0, mu > 0 (got n={n}, T={horizon}, mu={mu_hat})"
        )));
    }
    let (cond, _) = condition_number(omega_i);
    if !(cond <= condition_cap) {
        return Err(AcdError::Singular {
            condition: cond,
            cap: condition_cap,
        });
    }
    let inv = omega_i.try_inverse().ok_or(AcdError::Singular {
        condition: cond,
        cap: condition_cap,
    })?;
    let inv = symmetrize(&inv);
    let cov_per_obs = symmetrize(&(inv * omega_s * inv));
    let cov_per_time = cov_per_obs * mu_hat;
    let std_errors = cov_per_obs.diagonal().map(|v| (v / n as f64).sqrt());
    let std_errors_per_time = cov_per_time.diagonal().map(|v| (v / horizon).sqrt());
    let coherence_gap = (n as f64 * mu_hat / horizon - 1.0).abs();
    for j in 0..3 {
        if std_errors[j] > 0.0 {
            let ratio_sq = (std_errors_per_time[j] / std_errors[j]).powi(2);
            debug_assert!((ratio_sq - 1.0).abs() <= coherence_gap + 1e-9);
        }
    }
    Ok(Sandwich {
        cov_per_obs,
        cov_per_time,
        std_errors,
        std_errors_per_time,
        coherence_gap,
        condition_number: cond,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub theta_hat: AcdParams,
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub neg_loglik: f64,
    pub omega_s_hat: Matrix3<f64>,
    pub omega_i_hat: Matrix3<f64>,
    /// Sample mean duration.
    pub mu_hat: f64,
    pub n: usize,
    /// Horizon used for the per-time normalization.
    pub horizon: f64,
    /// True when no horizon was supplied and the last event time was used.
    pub horizon_inferred: bool,
    pub init_state: InitialState,
    /// Smallest eigenvalue of `omega_i_hat`; positive on a strict local maximum.
    pub min_info_eigenvalue: f64,
    /// `None` when `omega_i_hat` is singular.
    pub covariance: Option<Sandwich>,
    pub singular: bool,
    pub stationarity_flag: bool,
}

impl EstimateResult {
    pub fn std_errors(&self) -> Option<Vector3<f64>> {
        self.covariance.map(|c| c.std_errors)
    }
}

struct Point {
    theta: AcdParams,
    value: f64,
    si: ScoreInfo,
}

fn to_search(theta: &AcdParams, reparam: Reparam) -> Vector3<f64> {
    let a = Vector3::from(theta.as_array());
    match reparam {
        Reparam::LogParams => a.map(f64::ln),
        Reparam::Raw => a,
    }
}

fn from_search(eta: &Vector3<f64>, reparam: Reparam) -> Option<AcdParams> {
    let a = match reparam {
        Reparam::LogParams => eta.map(f64::exp),
        Reparam::Raw => *eta,
    };
    AcdParams::new(a[0], a[1], a[2]).ok()
}

/// Gradient and Hessian of the objective in search coordinates.
fn search_derivatives(p: &Point, reparam: Reparam) -> (Vector3<f64>, Matrix3<f64>) {
    match reparam {
        Reparam::Raw => (p.si.score_sum, p.si.info_sum),
        Reparam::LogParams => {
            let t = Vector3::from(p.theta.as_array());
            let g = p.si.score_sum.component_mul(&t);
            let d = Matrix3::from_diagonal(&t);
            let h = d * p.si.info_sum * d + Matrix3::from_diagonal(&g);
            (g, symmetrize(&h))
        }
    }
}

/// Newton direction with the Hessian's eigenvalues replaced by
/// `max(|lambda|, floor)`.
fn newton_direction(g: &Vector3<f64>, h: &Matrix3<f64>) -> Vector3<f64> {
    let eig = SymmetricEigen::new(*h);
    let scale = eig.eigenvalues.amax().max(1.0);
    let floor = 1e-10 * scale;
    let inv = eig.eigenvalues.map(|l| 1.0 / l.abs().max(floor));
    -(eig.eigenvectors * Matrix3::from_diagonal(&inv) * eig.eigenvectors.transpose() * g)
}

/// Maximizes the exponential quasi-likelihood of `data`.
pub fn estimate(data: &DurationSeries, options: &EstimateOptions) -> Result<EstimateResult> {
    options.validate()?;
    let x = data.durations();
    if x.len() < options.min_observations.max(1) {
        return Err(AcdError::TooShort {
            len: x.len(),
            min: options.min_observations.max(1),
        });
    }
    let start = match options.theta_start {
        Some(t) => t,
        None => default_start(x)?,
    };
    let init = options.init_strategy.resolve(x, &start)?;
    let n = x.len();
    let reparam = options.reparam;

    let point_at = |theta: AcdParams| -> Result<Point> {
        let (value, si) = evaluate(&theta, x, &init)?;
        Ok(Point { theta, value, si })
    };
    let grad_norm = |p: &Point| p.si.score_sum.amax() / n as f64;

    let mut current = point_at(start)?;
    let mut iterations = 0;
    let mut converged = grad_norm(&current) <= options.gradient_tolerance;
    while !converged && iterations < options.max_iterations {
        let (g, h) = search_derivatives(&current, reparam);
        let direction = newton_direction(&g, &h);
        let slope = g.dot(&direction);
        let eta = to_search(&current.theta, reparam);

        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            if let Some(theta) = from_search(&(eta + direction * t), reparam) {
                if let Ok(value) = neg_loglik(&theta, x, &init) {
                    if value <= current.value + ARMIJO * t * slope {
                        accepted = Some(theta);
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some(theta) = accepted else { break };
        current = point_at(theta)?;
        iterations += 1;
        converged = grad_norm(&current) <= options.gradient_tolerance;
    }

    let (omega_s_hat, omega_i_hat) = normalized_omegas(&current.si);
    let mu_hat = data.mean_duration();
    let (horizon, horizon_inferred) = match data.horizon() {
        Some(t) => (t, false),
        None => (data.span(), true),
    };
    let (_, min_info_eigenvalue) = condition_number(&omega_i_hat);
    let covariance = match sandwich_covariances(&omega_s_hat, &omega_i_hat, n, horizon, mu_hat, options.condition_cap) {
        Ok(s) => Some(s),
        Err(AcdError::Singular { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(EstimateResult {
        theta_hat: current.theta,
        converged,
        iterations,
        final_gradient_norm: grad_norm(&current),
        neg_loglik: current.value,
        omega_s_hat,
        omega_i_hat,
        mu_hat,
        n,
        horizon,
        horizon_inferred,
        init_state: init,
        min_info_eigenvalue,
        singular: covariance.is_none(),
        covariance,
        stationarity_flag: current.theta.finite_mean(),
    })
}
