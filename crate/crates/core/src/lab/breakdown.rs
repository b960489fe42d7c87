use serde::{Deserialize, Serialize};

use super::{run_mc, McConfig, McReport};
use crate::error::{AcdError, Result};
use crate::innovation::InnovationLaw;
use crate::params::AcdParams;
use crate::simulate::{lyapunov_exponent, LyapunovEstimate, SimOptions};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownConfig {
    /// Parameters with `alpha + beta >= 1`.
    pub params: AcdParams,
    pub law: InnovationLaw,
    pub horizons: Vec<f64>,
    pub replications: usize,
    pub base_seed: u64,
    /// Finite-mean parameters for the contrast run.
    pub baseline: AcdParams,
    pub lyapunov_draws: usize,
}

impl BreakdownConfig {
    pub fn new(params: AcdParams, law: InnovationLaw, replications: usize, base_seed: u64) -> Self {
        Self {
            params,
            law,
            horizons: vec![2000.0, 8000.0],
            replications,
            base_seed,
            baseline: AcdParams::new(0.1, 0.2, 0.7).expect("valid baseline"),
            lyapunov_draws: 1_000_000,
        }
    }
}

/// Dispersion of `sqrt(T)(theta_hat - theta0)` at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub horizon: f64,
    pub used: usize,
    pub convergence_rate: f64,
    pub median_estimate: Option<[f64; 3]>,
    pub iqr_sqrt_t: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub config: BreakdownConfig,
    pub lyapunov: LyapunovEstimate,
    pub nonstationary: Vec<DispersionRow>,
    pub baseline: Vec<DispersionRow>,
    /// Scaled IQR at the last horizon over the first, per coordinate.
    pub nonstationary_iqr_ratio: Option<[f64; 3]>,
    pub baseline_iqr_ratio: Option<[f64; 3]>,
    /// Every baseline ratio lies in `[0.8, 1.25]`.
    pub baseline_stable: bool,
}

fn dispersion(report: &McReport, horizon: f64) -> DispersionRow {
    let theta0 = report.config.true_params.as_array();
    let fits: Vec<[f64; 3]> = report
        .per_replication
        .iter()
        .filter(|r| r.converged)
        .filter_map(|r| r.theta_hat)
        .collect();
    let summarize = |f: &dyn Fn(&[f64]) -> f64, scale: f64, centre: bool| -> Option<[f64; 3]> {
        if fits.len() < 2 {
            return None;
        }
        let col = |j: usize| -> Vec<f64> {
            fits.iter()
                .map(|t| if centre { (t[j] - theta0[j]) * scale } else { t[j] })
                .collect()
        };
        Some([f(&col(0)), f(&col(1)), f(&col(2))])
    };
    DispersionRow {
        horizon,
        used: report.used,
        convergence_rate: report.convergence_rate,
        median_estimate: summarize(&|xs| stats::quantile(xs, 0.5), 1.0, false),
        iqr_sqrt_t: summarize(&stats::iqr, horizon.sqrt(), true),
    }
}

fn ratio(rows: &[DispersionRow]) -> Option<[f64; 3]> {
    let first = rows.first()?.iqr_sqrt_t?;
    let last = rows.last()?.iqr_sqrt_t?;
    (rows.len() > 1).then(|| [last[0] / first[0], last[1] / first[1], last[2] / first[2]])
}

fn sweep(params: &AcdParams, config: &BreakdownConfig, sim: SimOptions) -> Result<Vec<DispersionRow>> {
    config
        .horizons
        .iter()
        .map(|&t| {
            let mut mc = McConfig::horizon(*params, config.law, t, config.replications, config.base_seed);
            mc.sim_options = sim;
            Ok(dispersion(&run_mc(&mc)?, t))
        })
        .collect()
}

/// Monte Carlo dispersion of the estimator for a strictly stationary,
/// infinite-mean configuration, contrasted with a finite-mean baseline.
pub fn breakdown_demo(config: &BreakdownConfig) -> Result<BreakdownReport> {
    let persistence = config.params.persistence();
    if persistence < 1.0 {
        return Err(AcdError::InvalidConfig(format!(
            "breakdown demo needs alpha + beta >= 1, got {persistence}"
        )));
    }
    if !config.baseline.finite_mean() {
        return Err(AcdError::InfiniteMean {
            persistence: config.baseline.persistence(),
        });
    }
    if config.horizons.is_empty() {
        return Err(AcdError::InvalidConfig("no horizons".into()));
    }
    let lyapunov = lyapunov_exponent(
        &config.params,
        &config.law,
        config.lyapunov_draws,
        config.base_seed.into(),
    )?;
    if !lyapunov.is_contractive() {
        return Err(AcdError::NotErgodic {
            estimate: lyapunov.estimate,
            std_error: lyapunov.std_error,
        });
    }

    let nonstationary = sweep(&config.params, config, SimOptions::nonstationary())?;
    let baseline = sweep(&config.baseline, config, SimOptions::default())?;
    let baseline_iqr_ratio = ratio(&baseline);
    let baseline_stable = baseline_iqr_ratio
        .map(|r| r.iter().all(|x| (0.8..=1.25).contains(x)))
        .unwrap_or(false);
    Ok(BreakdownReport {
        config: config.clone(),
        lyapunov,
        nonstationary_iqr_ratio: ratio(&nonstationary),
        nonstationary,
        baseline_iqr_ratio,
        baseline,
        baseline_stable,
    })
}
