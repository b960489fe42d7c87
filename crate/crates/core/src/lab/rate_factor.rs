use serde::{Deserialize, Serialize};

use super::{long_run_omegas, run_mc, McConfig, McReport, Rows3};
use crate::error::{AcdError, Result};
use crate::params::stationary_mean;
use crate::rng::RngSeed;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorDiscrepancy {
    /// `"mu"`, `"1/mu"` or `"1"`.
    pub label: String,
    pub kappa: f64,
    /// `||cov_sqrt_t - kappa * sandwich||_F`.
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFactorReport {
    pub mu: f64,
    /// `Omega_I^-1 Omega_S Omega_I^-1` from one long path at the true parameter.
    pub sandwich: Rows3,
    #[serde(rename = "empirical_cov_sqrtT")]
    pub empirical_cov_sqrt_t: Rows3,
    #[serde(rename = "empirical_cov_sqrtn")]
    pub empirical_cov_sqrt_n: Rows3,
    pub discrepancies: Vec<FactorDiscrepancy>,
    pub winner: String,
    pub winner_kappa: f64,
    /// Winner's discrepancy divided by the runner-up's.
    pub runner_up_ratio: f64,
    /// The minimum is strict and at most half the runner-up's discrepancy.
    pub decisive: bool,
    /// `||cov_sqrt_t - mu cov_sqrt_n||_F / ||mu cov_sqrt_n||_F`.
    pub identity_relative_error: f64,
    pub identity_passed: bool,
    pub mc: McReport,
}

/// Compares the Monte Carlo covariance of `sqrt(T)(theta_hat - theta0)` with
/// `kappa` times the long-run sandwich for `kappa` in `{mu, 1/mu, 1}`.
pub fn rate_factor_probe(config: &McConfig, reference_n: usize) -> Result<RateFactorReport> {
    let mu = stationary_mean(&config.true_params)?;
    if (mu - 1.0).abs() <= 0.1 {
        return Err(AcdError::IndistinguishableFactors { mu });
    }
    config.validate()?;
    let reference_seed = RngSeed::derive(config.base_seed, u64::MAX);
    let (omega_s, omega_i) = long_run_omegas(&config.true_params, &config.law, reference_n, reference_seed)?;
    let inv = omega_i.try_inverse().ok_or(AcdError::Singular {
        condition: f64::INFINITY,
        cap: f64::INFINITY,
    })?;
    let sandwich = stats::symmetrize(&(inv * omega_s * inv));

    let mc = run_mc(config)?;
    let (cov_t, cov_n) = match (&mc.empirical_cov_sqrt_t, &mc.empirical_cov_sqrt_n) {
        (Some(t), Some(n)) => (stats::from_rows(t), stats::from_rows(n)),
        _ => {
            return Err(AcdError::InvalidConfig(
                "fewer than two converged replications; covariance undefined".into(),
            ))
        }
    };

    let discrepancies: Vec<FactorDiscrepancy> = [("mu", mu), ("1/mu", 1.0 / mu), ("1", 1.0)]
        .into_iter()
        .map(|(label, kappa)| FactorDiscrepancy {
            label: label.to_string(),
            kappa,
            discrepancy: (cov_t - sandwich * kappa).norm(),
        })
        .collect();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| discrepancies[a].discrepancy.total_cmp(&discrepancies[b].discrepancy));
    let best = &discrepancies[order[0]];
    let second = &discrepancies[order[1]];
    let runner_up_ratio = best.discrepancy / second.discrepancy;
    let decisive = best.discrepancy < second.discrepancy && runner_up_ratio <= 0.5;
    let (winner, winner_kappa) = (best.label.clone(), best.kappa);

    let scaled_n = cov_n * mu;
    let identity_relative_error = stats::frobenius_relative(&cov_t, &scaled_n);

    Ok(RateFactorReport {
        mu,
        sandwich: stats::to_rows(&sandwich),
        empirical_cov_sqrt_t: stats::to_rows(&cov_t),
        empirical_cov_sqrt_n: stats::to_rows(&cov_n),
        discrepancies,
        winner,
        winner_kappa,
        runner_up_ratio,
        decisive,
        identity_relative_error,
        identity_passed: identity_relative_error < 0.1,
        mc,
    })
}
