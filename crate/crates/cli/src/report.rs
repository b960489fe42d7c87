use acd_core::lab::{Gate, Rows3};
use acd_core::stats::to_rows;
use acd_core::{EstimateResult, InitialState};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub neg_loglik: f64,
    pub min_info_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceBlock {
    pub cov_per_obs: Rows3,
    pub cov_per_time: Rows3,
    pub std_errors: [f64; 3],
    pub std_errors_per_time: [f64; 3],
    pub coherence_gap: f64,
    pub condition_number: f64,
}

/// Report written by `acd estimate`. Vectors are ordered `(omega, alpha, beta)`.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub data: String,
    pub n: usize,
    pub theta_hat: [f64; 3],
    pub std_errors: Option<[f64; 3]>,
    pub std_errors_per_time: Option<[f64; 3]>,
    pub omega_s_hat: Rows3,
    pub omega_i_hat: Rows3,
    pub mu_hat: f64,
    pub horizon: f64,
    pub horizon_inferred: bool,
    pub init_state: InitialState,
    pub convergence: Convergence,
    pub covariance: Option<CovarianceBlock>,
    pub singular: bool,
    pub stationarity_flag: bool,
}

impl EstimateReport {
    pub fn new(data: String, r: &EstimateResult) -> Self {
        let covariance = r.covariance.map(|c| CovarianceBlock {
            cov_per_obs: to_rows(&c.cov_per_obs),
            cov_per_time: to_rows(&c.cov_per_time),
            std_errors: c.std_errors.into(),
            std_errors_per_time: c.std_errors_per_time.into(),
            coherence_gap: c.coherence_gap,
            condition_number: c.condition_number,
        });
        Self {
            data,
            n: r.n,
            theta_hat: r.theta_hat.as_array(),
            std_errors: covariance.as_ref().map(|c| c.std_errors),
            std_errors_per_time: covariance.as_ref().map(|c| c.std_errors_per_time),
            omega_s_hat: to_rows(&r.omega_s_hat),
            omega_i_hat: to_rows(&r.omega_i_hat),
            mu_hat: r.mu_hat,
            horizon: r.horizon,
            horizon_inferred: r.horizon_inferred,
            init_state: r.init_state,
            convergence: Convergence {
                converged: r.converged,
                iterations: r.iterations,
                final_gradient_norm: r.final_gradient_norm,
                neg_loglik: r.neg_loglik,
                min_info_eigenvalue: r.min_info_eigenvalue,
            },
            covariance,
            singular: r.singular,
            stationarity_flag: r.stationarity_flag,
        }
    }
}

/// Envelope for `acd mc` output.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport<R: Serialize> {
    pub suite: String,
    pub passed: bool,
    pub gates: Vec<Gate>,
    pub report: R,
}

impl<R: Serialize> SuiteReport<R> {
    pub fn new(suite: &str, gates: Vec<Gate>, report: R) -> Self {
        Self {
            suite: suite.to_string(),
            passed: gates.iter().all(|g| g.passed),
            gates,
            report,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
