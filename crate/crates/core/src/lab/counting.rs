use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AcdError, Result};
use crate::innovation::InnovationLaw;
use crate::params::{stationary_mean, AcdParams};
use crate::rng::RngSeed;
use crate::simulate::{count_events, SimOptions};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingRateRow {
    pub horizon: f64,
    /// Mean of `n(T) / T`.
    pub mean_rate: f64,
    /// Mean of `|n(T) mu / T - 1|`.
    pub mean_abs_deviation: f64,
    pub max_abs_deviation: f64,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingRateSummary {
    pub mu: f64,
    pub inverse_mu: f64,
    pub replications: usize,
    pub rows: Vec<CountingRateRow>,
    /// Mean and max deviations both shrink from the first to the last horizon.
    pub decreasing: bool,
}

/// `n(T)/T` against `1/mu` over a grid of horizons. Replication `r` uses the
/// same path for every horizon, so the rows compare nested windows.
pub fn counting_rate_check(
    params: &AcdParams,
    law: &InnovationLaw,
    horizons: &[f64],
    replications: usize,
    base_seed: u64,
) -> Result<CountingRateSummary> {
    let mu = stationary_mean(params)?;
    if horizons.is_empty() || replications == 0 {
        return Err(AcdError::InvalidConfig(
            "need at least one horizon and one replication".into(),
        ));
    }
    if let Some(&t) = horizons.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(AcdError::InvalidConfig(format!("horizon must be > 0, got {t}")));
    }
    let opts = SimOptions::default();
    let rows = horizons
        .iter()
        .map(|&t| {
            let counts = (0..replications)
                .into_par_iter()
                .map(|r| count_events(params, law, t, RngSeed::derive(base_seed, r as u64), &opts))
                .collect::<Result<Vec<_>>>()?;
            let rates: Vec<f64> = counts.iter().map(|&n| n as f64 / t).collect();
            let devs: Vec<f64> = rates.iter().map(|r| (r * mu - 1.0).abs()).collect();
            Ok(CountingRateRow {
                horizon: t,
                mean_rate: stats::mean(&rates),
                mean_abs_deviation: stats::mean(&devs),
                max_abs_deviation: devs.iter().copied().fold(0.0, f64::max),
                counts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let decreasing = rows.len() > 1
        && last.mean_abs_deviation < first.mean_abs_deviation
        && last.max_abs_deviation < first.max_abs_deviation;
    Ok(CountingRateSummary {
        mu,
        inverse_mu: 1.0 / mu,
        replications,
        rows,
        decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Large-T mean of `|n(T) mu / T - 1|` under exponential innovations,
    /// from the ARMA(1,1) long-run variance of the durations.
    fn expected_mean_abs_deviation(omega: f64, alpha: f64, beta: f64, t: f64) -> f64 {
        let mu = omega / (1.0 - alpha - beta);
        let b = 1.0 - beta * beta - 2.0 * alpha * beta;
        let second_moment = 2.0 * mu * mu * b / (b - 2.0 * alpha * alpha);
        let long_run = 0.5 * second_moment * (1.0 - beta).powi(2) / (1.0 - alpha - beta).powi(2);
        (2.0 / std::f64::consts::PI).sqrt() * (long_run / (mu * t)).sqrt()
    }

    #[test]
    fn rate_concentrates_near_inverse_mean() {
        let p = AcdParams::new(0.1, 0.2, 0.7).unwrap();
        let s = counting_rate_check(&p, &InnovationLaw::Exponential, &[1e2, 1e3, 1e4], 100, 3).unwrap();
        assert!((s.mu - 1.0).abs() < 1e-12);
        let last = s.rows.last().unwrap();
        let expected = expected_mean_abs_deviation(0.1, 0.2, 0.7, 1e4);
        assert!(
            (last.mean_abs_deviation / expected - 1.0).abs() < 0.25,
            "{} vs {expected}",
            last.mean_abs_deviation
        );
        assert!(s.decreasing);
        assert_eq!(last.counts.len(), 100);
    }

    #[test]
    fn rate_for_mean_five() {
        let p = AcdParams::new(2.0, 0.05, 0.55).unwrap();
        let s = counting_rate_check(&p, &InnovationLaw::Exponential, &[1e4], 50, 4).unwrap();
        assert!((s.rows[0].mean_rate - 0.2).abs() < 0.004);
        let expected = expected_mean_abs_deviation(2.0, 0.05, 0.55, 1e4);
        assert!(
            (s.rows[0].mean_abs_deviation / expected - 1.0).abs() < 0.3,
            "{} vs {expected}",
            s.rows[0].mean_abs_deviation
        );
        assert!(!s.decreasing);
    }

    #[test]
    fn rejects_infinite_mean() {
        let p = AcdParams::new(0.1, 0.6, 0.5).unwrap();
        assert!(matches!(
            counting_rate_check(&p, &InnovationLaw::Exponential, &[100.0], 2, 1),
            Err(AcdError::InfiniteMean { .. })
        ));
        let p = AcdParams::new(0.1, 0.2, 0.7).unwrap();
        assert!(counting_rate_check(&p, &InnovationLaw::Exponential, &[], 2, 1).is_err());
        assert!(counting_rate_check(&p, &InnovationLaw::Exponential, &[-1.0], 2, 1).is_err());
    }
}
