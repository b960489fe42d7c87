//! Monte Carlo laboratory for the estimator's large-sample behaviour.
//!
//! Replication `r` of a run with base seed `s` simulates from stream
//! [`RngSeed::derive(s, r)`](crate::rng::RngSeed::derive). Replications run
//! in parallel and are merged in index order, so a report depends only on
//! its configuration.

mod breakdown;
mod counting;
mod fclt;
mod probes;
mod rate_factor;

pub use breakdown::{breakdown_demo, BreakdownConfig, BreakdownReport, DispersionRow};
pub use counting::{counting_rate_check, CountingRateRow, CountingRateSummary};
pub use fclt::{functional_clt_probe, FcltConfig, FcltSummary, FractionRow, IncrementRow};
pub use probes::{information_at_horizons, long_run_omegas, third_derivative_probe, ThirdDerivativeRow};
pub use rate_factor::{rate_factor_probe, FactorDiscrepancy, RateFactorReport};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AcdError, Result};
use crate::innovation::InnovationLaw;
use crate::params::AcdParams;
use crate::qmle::{estimate, EstimateOptions};
use crate::rng::RngSeed;
use crate::simulate::{simulate_fixed_n, simulate_horizon, SimOptions};
use crate::stats::{self, KsResult};

/// 3×3 matrix in row-major nested-array form.
pub type Rows3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SampleMode {
    Horizon(f64),
    FixedN(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub true_params: AcdParams,
    pub law: InnovationLaw,
    pub mode: SampleMode,
    pub replications: usize,
    pub base_seed: u64,
    pub estimate_options: EstimateOptions,
    pub sim_options: SimOptions,
    pub nominal_coverage: f64,
}

impl McConfig {
    pub fn horizon(
        true_params: AcdParams,
        law: InnovationLaw,
        horizon: f64,
        replications: usize,
        base_seed: u64,
    ) -> Self {
        Self {
            true_params,
            law,
            mode: SampleMode::Horizon(horizon),
            replications,
            base_seed,
            estimate_options: EstimateOptions::default(),
            sim_options: SimOptions::default(),
            nominal_coverage: 0.95,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(AcdError::InvalidConfig("replications must be >= 1".into()));
        }
        match self.mode {
            SampleMode::Horizon(t) if !(t.is_finite() && t > 0.0) => {
                return Err(AcdError::InvalidConfig(format!("horizon must be > 0, got {t}")))
            }
            SampleMode::FixedN(0) => return Err(AcdError::InvalidConfig("n must be >= 1".into())),
            _ => {}
        }
        if !(self.nominal_coverage > 0.0 && self.nominal_coverage < 1.0) {
            return Err(AcdError::InvalidConfig(format!(
                "nominal coverage must lie in (0, 1), got {}",
                self.nominal_coverage
            )));
        }
        if !self.true_params.finite_mean() && !self.sim_options.allow_nonstationary {
            return Err(AcdError::InfiniteMean {
                persistence: self.true_params.persistence(),
            });
        }
        self.estimate_options.validate()
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub seed: RngSeed,
    /// `n(T)` (or `n` in fixed-count mode); zero when simulation failed.
    pub count: usize,
    /// Normalizing time: the horizon, or the last event time in fixed-count mode.
    pub span: f64,
    pub theta_hat: Option<[f64; 3]>,
    pub converged: bool,
    pub std_errors: Option<[f64; 3]>,
    pub error: Option<String>,
}

impl ReplicationRecord {
    fn usable(&self) -> bool {
        self.converged && self.theta_hat.is_some()
    }
}

/// Summary of `n(T)/T` across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: McConfig,
    pub per_replication: Vec<ReplicationRecord>,
    /// Replications that converged and entered the aggregates.
    pub used: usize,
    pub non_converged: usize,
    pub failed: usize,
    pub convergence_rate: f64,
    pub mean_estimate: Option<[f64; 3]>,
    pub bias: Option<[f64; 3]>,
    /// Standard deviation of the estimates across replications.
    pub empirical_sd: Option<[f64; 3]>,
    /// Monte Carlo standard error of the mean estimate, `sd / sqrt(used)`.
    pub mc_std_error: Option<[f64; 3]>,
    pub rmse: Option<[f64; 3]>,
    #[serde(rename = "empirical_cov_sqrtT")]
    pub empirical_cov_sqrt_t: Option<Rows3>,
    #[serde(rename = "empirical_cov_sqrtn")]
    pub empirical_cov_sqrt_n: Option<Rows3>,
    pub coverage: Option<[f64; 3]>,
    pub counting_rate: Option<RateSummary>,
    pub normality_stats: Option<[KsResult; 3]>,
}

fn replicate(config: &McConfig, index: usize) -> ReplicationRecord {
    let seed = RngSeed::derive(config.base_seed, index as u64);
    let simulated = match config.mode {
        SampleMode::Horizon(t) => simulate_horizon(&config.true_params, &config.law, t, seed, &config.sim_options),
        SampleMode::FixedN(n) => simulate_fixed_n(&config.true_params, &config.law, n, seed, &config.sim_options),
    };
    let mut record = ReplicationRecord {
        seed,
        count: 0,
        span: 0.0,
        theta_hat: None,
        converged: false,
        std_errors: None,
        error: None,
    };
    let data = match simulated {
        Ok(d) => d,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.count = data.count();
    record.span = data.span();
    match estimate(&data, &config.estimate_options) {
        Ok(r) => {
            record.theta_hat = Some(r.theta_hat.as_array());
            record.converged = r.converged;
            record.std_errors = r.std_errors().map(|s| [s[0], s[1], s[2]]);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Simulates and estimates `config.replications` independent samples.
pub fn run_mc(config: &McConfig) -> Result<McReport> {
    config.validate()?;
    let per_replication: Vec<ReplicationRecord> = (0..config.replications)
        .into_par_iter()
        .map(|r| replicate(config, r))
        .collect();
    Ok(aggregate(config.clone(), per_replication))
}

fn column(rows: &[Vector3<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

fn triple(f: impl Fn(usize) -> f64) -> [f64; 3] {
    [f(0), f(1), f(2)]
}

fn aggregate(config: McConfig, per_replication: Vec<ReplicationRecord>) -> McReport {
    let theta0 = Vector3::from(config.true_params.as_array());
    let usable: Vec<&ReplicationRecord> = per_replication.iter().filter(|r| r.usable()).collect();
    let failed = per_replication.iter().filter(|r| r.theta_hat.is_none()).count();
    let non_converged = per_replication.len() - usable.len() - failed;
    let used = usable.len();

    let estimates: Vec<Vector3<f64>> = usable.iter().map(|r| Vector3::from(r.theta_hat.unwrap())).collect();
    let scaled_t: Vec<Vector3<f64>> = usable
        .iter()
        .zip(&estimates)
        .map(|(r, e)| (e - theta0) * r.span.sqrt())
        .collect();
    let scaled_n: Vec<Vector3<f64>> = usable
        .iter()
        .zip(&estimates)
        .map(|(r, e)| (e - theta0) * (r.count as f64).sqrt())
        .collect();

    let (mean_estimate, bias, rmse) = if used > 0 {
        let m = estimates.iter().sum::<Vector3<f64>>() / used as f64;
        let b = m - theta0;
        let rmse = triple(|j| (estimates.iter().map(|e| (e[j] - theta0[j]).powi(2)).sum::<f64>() / used as f64).sqrt());
        (Some(triple(|j| m[j])), Some(triple(|j| b[j])), Some(rmse))
    } else {
        (None, None, None)
    };
    let (empirical_sd, mc_std_error) = if used >= 2 {
        let sd = triple(|j| stats::std_dev(&column(&estimates, j)));
        (Some(sd), Some(triple(|j| sd[j] / (used as f64).sqrt())))
    } else {
        (None, None)
    };

    let z = stats::normal_quantile(0.5 + config.nominal_coverage / 2.0);
    let studentized: Vec<Vector3<f64>> = usable
        .iter()
        .filter_map(|r| {
            let se = r.std_errors?;
            let th = r.theta_hat?;
            Some(Vector3::from_fn(|j, _| (th[j] - theta0[j]) / se[j]))
        })
        .collect();
    let coverage = (!studentized.is_empty())
        .then(|| triple(|j| studentized.iter().filter(|s| s[j].abs() <= z).count() as f64 / studentized.len() as f64));
    let normality_stats = (studentized.len() >= 2).then(|| {
        let ks = |j| stats::ks_test_normal(&column(&studentized, j));
        [ks(0), ks(1), ks(2)]
    });

    let rates: Vec<f64> = per_replication
        .iter()
        .filter(|r| r.span > 0.0)
        .map(|r| r.count as f64 / r.span)
        .collect();
    let counting_rate = (matches!(config.mode, SampleMode::Horizon(_)) && !rates.is_empty()).then(|| RateSummary {
        mean: stats::mean(&rates),
        sd: stats::std_dev(&rates),
        min: rates.iter().copied().fold(f64::INFINITY, f64::min),
        max: rates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });

    McReport {
        convergence_rate: used as f64 / per_replication.len().max(1) as f64,
        used,
        non_converged,
        failed,
        mean_estimate,
        bias,
        empirical_sd,
        mc_std_error,
        rmse,
        empirical_cov_sqrt_t: stats::sample_covariance(&scaled_t).map(|m| stats::to_rows(&m)),
        empirical_cov_sqrt_n: stats::sample_covariance(&scaled_n).map(|m| stats::to_rows(&m)),
        coverage,
        counting_rate,
        normality_stats,
        per_replication,
        config,
    }
}

/// One pass/fail check with its observed value and bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub observed: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Gate {
    pub fn below(name: impl Into<String>, observed: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            lower: None,
            upper: Some(upper),
            passed: observed < upper,
        }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, lower: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            lower: Some(lower),
            upper: None,
            passed: observed >= lower,
        }
    }

    pub fn within(name: impl Into<String>, observed: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            lower: Some(lower),
            upper: Some(upper),
            passed: (lower..=upper).contains(&observed),
        }
    }
}

/// Minimum number of replications for which the distributional gates of
/// [`normality_gates`] are evaluated.
pub const MIN_GATED_REPLICATIONS: usize = 100;

/// Gates for a finite-mean normality run: convergence rate, per-coordinate
/// KS distance, coverage band and bias against three Monte Carlo standard
/// errors. Empty when the run is too small to judge.
pub fn normality_gates(report: &McReport) -> Vec<Gate> {
    if report.config.replications < MIN_GATED_REPLICATIONS {
        return Vec::new();
    }
    let names = ["omega", "alpha", "beta"];
    let mut gates = vec![Gate::at_least("convergence_rate", report.convergence_rate, 0.98)];
    if let Some(ks) = &report.normality_stats {
        for j in 0..3 {
            gates.push(Gate::below(format!("ks_{}", names[j]), ks[j].statistic, 0.06));
        }
    }
    if let Some(cov) = &report.coverage {
        for j in 0..3 {
            gates.push(Gate::within(format!("coverage_{}", names[j]), cov[j], 0.91, 0.98));
        }
    }
    if let (Some(bias), Some(se)) = (&report.bias, &report.mc_std_error) {
        for j in 0..3 {
            gates.push(Gate::below(
                format!("abs_bias_over_mc_se_{}", names[j]),
                bias[j].abs() / se[j],
                3.0,
            ));
        }
    }
    gates
}
