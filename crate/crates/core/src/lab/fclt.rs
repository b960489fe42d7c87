use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{long_run_omegas, Rows3};
use crate::error::{AcdError, Result};
use crate::filter::score_contributions;
use crate::innovation::InnovationLaw;
use crate::params::AcdParams;
use crate::rng::RngSeed;
use crate::simulate::{simulate_fixed_n, SimOptions};
use crate::stats::{self, CompensatedVec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcltConfig {
    pub theta0: AcdParams,
    pub law: InnovationLaw,
    pub n: usize,
    /// Fractions in `[0, 1]`.
    pub grid: Vec<f64>,
    pub replications: usize,
    pub base_seed: u64,
    /// Length of the single path used for the reference `Omega_S`.
    pub reference_n: usize,
    /// Frobenius relative tolerance for the covariance check.
    pub covariance_tolerance: f64,
}

impl FcltConfig {
    pub fn new(theta0: AcdParams, law: InnovationLaw, n: usize, replications: usize, base_seed: u64) -> Self {
        Self {
            theta0,
            law,
            n,
            grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            replications,
            base_seed,
            reference_n: 1_000_000,
            covariance_tolerance: 0.15,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.replications < 2 || self.reference_n == 0 {
            return Err(AcdError::InvalidConfig(
                "need n >= 1, reference_n >= 1 and at least two replications".into(),
            ));
        }
        if self.grid.is_empty() || self.grid.iter().any(|u| !(0.0..=1.0).contains(u)) {
            return Err(AcdError::InvalidConfig("grid fractions must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionRow {
    pub u: f64,
    /// Number of summed contributions, `floor(n u)`.
    pub terms: usize,
    pub covariance: Rows3,
    pub expected: Rows3,
    pub relative_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementRow {
    pub u: f64,
    pub v: f64,
    /// Largest `|corr(S(u)_j, (S(v) - S(u))_k)|` over `j, k`.
    pub max_abs_correlation: f64,
    pub band: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcltSummary {
    pub config: FcltConfig,
    pub reference_omega_s: Rows3,
    pub fractions: Vec<FractionRow>,
    pub increments: Vec<IncrementRow>,
    /// `S(0)` is exactly zero in every replication (only checked when 0 is on the grid).
    pub zero_start_exact: bool,
    pub passed: bool,
}

/// Partial-sum score process `n^-1/2 sum_{i <= floor(n u)} xi_i` at the true
/// parameter, evaluated at each grid fraction.
fn partial_sums(config: &FcltConfig, grid: &[f64], r: usize) -> Result<Vec<Vector3<f64>>> {
    let seed = RngSeed::derive(config.base_seed, r as u64);
    let data = simulate_fixed_n(&config.theta0, &config.law, config.n, seed, &SimOptions::default())?;
    let init = data
        .initial_state()
        .expect("simulated series records its initial state");
    let xi = score_contributions(&config.theta0, data.durations(), &init)?;
    let scale = (config.n as f64).sqrt();
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = CompensatedVec3::default();
    let mut taken = 0;
    for &u in grid {
        let k = (config.n as f64 * u).floor() as usize;
        for s in &xi[taken..k] {
            acc.add(s);
        }
        taken = k;
        out.push(acc.value() / scale);
    }
    Ok(out)
}

pub fn functional_clt_probe(config: &FcltConfig) -> Result<FcltSummary> {
    config.validate()?;
    let mut grid = config.grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let reference_seed = RngSeed::derive(config.base_seed, u64::MAX);
    let (omega_s, _) = long_run_omegas(&config.theta0, &config.law, config.reference_n, reference_seed)?;

    let paths = (0..config.replications)
        .into_par_iter()
        .map(|r| partial_sums(config, &grid, r))
        .collect::<Result<Vec<_>>>()?;
    let at = |g: usize| -> Vec<Vector3<f64>> { paths.iter().map(|p| p[g]).collect() };

    let mut zero_start_exact = true;
    let mut fractions = Vec::new();
    for (g, &u) in grid.iter().enumerate() {
        let values = at(g);
        if u == 0.0 {
            zero_start_exact = values.iter().all(|s| s.iter().all(|&c| c == 0.0));
            continue;
        }
        let cov = stats::sample_covariance(&values).expect("at least two replications");
        let expected = omega_s * u;
        let relative_error = stats::frobenius_relative(&cov, &expected);
        fractions.push(FractionRow {
            u,
            terms: (config.n as f64 * u).floor() as usize,
            covariance: stats::to_rows(&cov),
            expected: stats::to_rows(&expected),
            relative_error,
            passed: relative_error < config.covariance_tolerance,
        });
    }

    let band = 4.0 / (config.replications as f64).sqrt();
    let mut increments = Vec::new();
    for g in 0..grid.len().saturating_sub(1) {
        if grid[g] == 0.0 {
            continue;
        }
        let first = at(g);
        let second: Vec<Vector3<f64>> = at(g + 1).iter().zip(&first).map(|(b, a)| b - a).collect();
        let mut worst: f64 = 0.0;
        for j in 0..3 {
            let a: Vec<f64> = first.iter().map(|s| s[j]).collect();
            for k in 0..3 {
                let b: Vec<f64> = second.iter().map(|s| s[k]).collect();
                worst = worst.max(stats::correlation(&a, &b).abs());
            }
        }
        increments.push(IncrementRow {
            u: grid[g],
            v: grid[g + 1],
            max_abs_correlation: worst,
            band,
            passed: worst < band,
        });
    }

    let passed = zero_start_exact && fractions.iter().all(|r| r.passed) && increments.iter().all(|r| r.passed);
    Ok(FcltSummary {
        config: config.clone(),
        reference_omega_s: stats::to_rows(&omega_s),
        fractions,
        increments,
        zero_start_exact,
        passed,
    })
}
