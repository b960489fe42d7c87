//! Probes of the information matrix along a single long path: its limit at
//! random horizons and a finite-difference bound on third derivatives.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{AcdError, Result};
use crate::filter::{evaluate, normalized_omegas};
use crate::innovation::InnovationLaw;
use crate::params::AcdParams;
use crate::rng::RngSeed;
use crate::simulate::{simulate_fixed_n, simulate_horizon, DurationSeries, SimOptions};

fn true_init(data: &DurationSeries) -> crate::params::InitialState {
    data.initial_state()
        .expect("simulated series records its initial state")
}

/// `(Omega_S_hat, Omega_I_hat)` at the true parameter from one path of length `n`.
pub fn long_run_omegas(
    theta0: &AcdParams,
    law: &InnovationLaw,
    n: usize,
    seed: RngSeed,
) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    let data = simulate_fixed_n(theta0, law, n, seed, &SimOptions::default())?;
    let (_, si) = evaluate(theta0, data.durations(), &true_init(&data))?;
    Ok(normalized_omegas(&si))
}

/// `Omega_I_hat` at the true parameter over `[0, T]` for each horizon, all
/// cut from the same path.
pub fn information_at_horizons(
    theta0: &AcdParams,
    law: &InnovationLaw,
    horizons: &[f64],
    seed: RngSeed,
) -> Result<Vec<(f64, usize, Matrix3<f64>)>> {
    horizons
        .iter()
        .map(|&t| {
            let data = simulate_horizon(theta0, law, t, seed, &SimOptions::default())?;
            let (_, si) = evaluate(theta0, data.durations(), &true_init(&data))?;
            Ok((t, data.count(), normalized_omegas(&si).1))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThirdDerivativeRow {
    pub n: usize,
    /// Largest `|n^-1 d^3 Q / dtheta_h dtheta_i dtheta_j|` over the ball points.
    pub tau: f64,
}

/// Ten points on the sphere of the given radius around `center`.
fn ball_points(center: &AcdParams, radius: f64) -> Result<Vec<AcdParams>> {
    let s3 = 1.0 / 3f64.sqrt();
    let s2 = 1.0 / 2f64.sqrt();
    let dirs = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
        [s3, s3, s3],
        [-s3, -s3, -s3],
        [s2, -s2, 0.0],
        [0.0, s2, -s2],
    ];
    let c = center.as_array();
    dirs.iter()
        .map(|d| AcdParams::new(c[0] + radius * d[0], c[1] + radius * d[1], c[2] + radius * d[2]))
        .collect()
}

/// Finite-difference sup-norm of third derivatives of the average objective
/// over a ball around `theta0`, for each sample size in `sizes` (all prefixes
/// of one path).
pub fn third_derivative_probe(
    theta0: &AcdParams,
    law: &InnovationLaw,
    sizes: &[usize],
    radius: f64,
    seed: RngSeed,
) -> Result<Vec<ThirdDerivativeRow>> {
    let largest = *sizes
        .iter()
        .max()
        .ok_or_else(|| AcdError::InvalidConfig("no sample sizes".into()))?;
    let data = simulate_fixed_n(theta0, law, largest, seed, &SimOptions::default())?;
    let init = true_init(&data);
    let points = ball_points(theta0, radius)?;
    sizes
        .iter()
        .map(|&n| {
            let x = &data.durations()[..n];
            let mut tau: f64 = 0.0;
            for p in &points {
                let a = p.as_array();
                for h in 0..3 {
                    let step = 1e-6 * a[h].abs().max(1.0);
                    let mut up = a;
                    let mut down = a;
                    up[h] += step;
                    down[h] -= step;
                    let (_, hi) = evaluate(&AcdParams::from_array(up)?, x, &init)?;
                    let (_, lo) = evaluate(&AcdParams::from_array(down)?, x, &init)?;
                    let d3 = (hi.info_sum - lo.info_sum) / (2.0 * step * n as f64);
                    tau = tau.max(d3.amax());
                }
            }
            Ok(ThirdDerivativeRow { n, tau })
        })
        .collect()
}
