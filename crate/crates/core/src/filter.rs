//! Exponential quasi-likelihood of the ACD(1,1) model with analytic first
//! and second derivatives.
//!
//! The conditional mean recursion and its parameter derivatives are
//!
//! ```text
//! psi_i    = omega + alpha * x_{i-1} + beta * psi_{i-1}
//! dpsi_i   = (1, x_{i-1}, psi_{i-1})' + beta * dpsi_{i-1}
//! d2psi_i  = beta * d2psi_{i-1} + e_b dpsi_{i-1}' + dpsi_{i-1} e_b'
//! ```
//!
//! with `dpsi_0 = 0`, `d2psi_0 = 0` and `e_b` the beta unit vector. The
//! per-observation objective is `l_i = ln psi_i + x_i / psi_i`, whose sum is
//! the negative log-likelihood. `xi_i = dl_i/dtheta` and
//! `zeta_i = d2l_i/dtheta dtheta'`; with this sign `E[zeta_i]` is positive
//! definite at the true parameter.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{AcdError, Result};
use crate::params::{stationary_mean, AcdParams, InitialState};
use crate::stats::{symmetrize, CompensatedMat3, CompensatedSum, CompensatedVec3};

const BETA: usize = 2;

/// Per-observation filter sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub psi: Vec<f64>,
    pub dpsi: Vec<Vector3<f64>>,
    pub d2psi: Vec<Matrix3<f64>>,
    pub loglik_terms: Vec<f64>,
    pub neg_loglik: f64,
}

impl FilterOutput {
    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }
}

/// Unnormalized score and information sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreInfo {
    pub score_sum: Vector3<f64>,
    pub info_sum: Matrix3<f64>,
    pub outer_sum: Matrix3<f64>,
    pub n: usize,
}

/// How `(x_0, psi_0)` is chosen when the true initial state is unknown.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitStrategy {
    /// `x_0 = psi_0 =` sample mean of the observed durations.
    #[default]
    SampleMean,
    Fixed(InitialState),
    /// `x_0 = psi_0 = omega / (1 - alpha - beta)` at the starting parameter,
    /// held fixed during optimization. Falls back to the sample mean when the
    /// starting parameter has infinite mean.
    ModelImplied,
}

impl InitStrategy {
    pub fn resolve(&self, durations: &[f64], start: &AcdParams) -> Result<InitialState> {
        let sample_mean = || {
            let m = durations.iter().sum::<f64>() / durations.len() as f64;
            InitialState::new(m, m)
        };
        match self {
            Self::SampleMean => sample_mean(),
            Self::Fixed(init) => Ok(*init),
            Self::ModelImplied => match stationary_mean(start) {
                Ok(mu) => InitialState::new(mu, mu),
                Err(_) => sample_mean(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Step {
    x: f64,
    psi: f64,
    dpsi: Vector3<f64>,
    d2psi: Matrix3<f64>,
}

struct Recursion<'a> {
    omega: f64,
    alpha: f64,
    beta: f64,
    data: std::slice::Iter<'a, f64>,
    x_prev: f64,
    psi_prev: f64,
    dpsi_prev: Vector3<f64>,
    d2psi_prev: Matrix3<f64>,
}

impl<'a> Recursion<'a> {
    fn new(theta: &AcdParams, data: &'a [f64], init: &InitialState) -> Self {
        Self {
            omega: theta.omega(),
            alpha: theta.alpha(),
            beta: theta.beta(),
            data: data.iter(),
            x_prev: init.x0(),
            psi_prev: init.psi0(),
            dpsi_prev: Vector3::zeros(),
            d2psi_prev: Matrix3::zeros(),
        }
    }
}

impl Iterator for Recursion<'_> {
    type Item = Step;

    fn next(&mut self) -> Option<Step> {
        let &x = self.data.next()?;
        let psi = self.omega + self.alpha * self.x_prev + self.beta * self.psi_prev;
        let dpsi = Vector3::new(1.0, self.x_prev, self.psi_prev) + self.beta * self.dpsi_prev;
        let mut d2psi = self.beta * self.d2psi_prev;
        for j in 0..3 {
            d2psi[(BETA, j)] += self.dpsi_prev[j];
            d2psi[(j, BETA)] += self.dpsi_prev[j];
        }
        self.x_prev = x;
        self.psi_prev = psi;
        self.dpsi_prev = dpsi;
        self.d2psi_prev = d2psi;
        Some(Step { x, psi, dpsi, d2psi })
    }
}

fn check_inputs(theta: &AcdParams, data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(AcdError::TooShort { len: 0, min: 1 });
    }
    if !theta.is_strict() {
        return Err(AcdError::InvalidConfig(
            "filter requires strictly positive parameters".into(),
        ));
    }
    Ok(())
}

/// Observation `i`'s contributions `(l_i, xi_i, zeta_i)`.
fn contributions(step: &Step) -> (f64, Vector3<f64>, Matrix3<f64>) {
    let Step { x, psi, dpsi, d2psi } = *step;
    let ratio = x / psi;
    let term = psi.ln() + ratio;
    let weight = (1.0 - ratio) / psi;
    let xi = dpsi * weight;
    let zeta = dpsi * dpsi.transpose() * ((2.0 * ratio - 1.0) / (psi * psi)) + d2psi * weight;
    (term, xi, zeta)
}

fn finite_step(index: usize, psi: f64, term: f64) -> Result<()> {
    if psi.is_finite() && psi > 0.0 && term.is_finite() {
        Ok(())
    } else {
        Err(AcdError::FilterDivergence { index })
    }
}

/// Runs the recursion and records every per-observation quantity.
pub fn run_filter(theta: &AcdParams, data: &[f64], init: &InitialState) -> Result<FilterOutput> {
    check_inputs(theta, data)?;
    let n = data.len();
    let mut out = FilterOutput {
        psi: Vec::with_capacity(n),
        dpsi: Vec::with_capacity(n),
        d2psi: Vec::with_capacity(n),
        loglik_terms: Vec::with_capacity(n),
        neg_loglik: 0.0,
    };
    let mut total = CompensatedSum::default();
    for (i, step) in Recursion::new(theta, data, init).enumerate() {
        let term = step.psi.ln() + step.x / step.psi;
        finite_step(i + 1, step.psi, term)?;
        total.add(term);
        out.psi.push(step.psi);
        out.dpsi.push(step.dpsi);
        out.d2psi.push(step.d2psi);
        out.loglik_terms.push(term);
    }
    out.neg_loglik = total.value();
    Ok(out)
}

/// Builds score and information sums from a stored filter pass.
pub fn score_and_info(filter: &FilterOutput, data: &[f64]) -> Result<ScoreInfo> {
    if filter.len() != data.len() {
        return Err(AcdError::DimensionMismatch {
            filter: filter.len(),
            data: data.len(),
        });
    }
    let mut acc = Accumulator::default();
    for (i, &x) in data.iter().enumerate() {
        let step = Step {
            x,
            psi: filter.psi[i],
            dpsi: filter.dpsi[i],
            d2psi: filter.d2psi[i],
        };
        acc.push(&step);
    }
    Ok(acc.finish().1)
}

#[derive(Default)]
struct Accumulator {
    neg_loglik: CompensatedSum,
    score: CompensatedVec3,
    info: CompensatedMat3,
    outer: CompensatedMat3,
    n: usize,
}

impl Accumulator {
    fn push(&mut self, step: &Step) -> f64 {
        let (term, xi, zeta) = contributions(step);
        self.neg_loglik.add(term);
        self.score.add(&xi);
        self.info.add(&zeta);
        self.outer.add(&(xi * xi.transpose()));
        self.n += 1;
        term
    }

    fn finish(self) -> (f64, ScoreInfo) {
        (
            self.neg_loglik.value(),
            ScoreInfo {
                score_sum: self.score.value(),
                info_sum: symmetrize(&self.info.value()),
                outer_sum: symmetrize(&self.outer.value()),
                n: self.n,
            },
        )
    }
}

/// Negative log-likelihood together with its gradient (`score_sum`) and
/// Hessian (`info_sum`) in one streaming pass.
pub fn evaluate(theta: &AcdParams, data: &[f64], init: &InitialState) -> Result<(f64, ScoreInfo)> {
    check_inputs(theta, data)?;
    let mut acc = Accumulator::default();
    for (i, step) in Recursion::new(theta, data, init).enumerate() {
        let term = acc.push(&step);
        finite_step(i + 1, step.psi, term)?;
    }
    Ok(acc.finish())
}

/// Negative log-likelihood only.
pub fn neg_loglik(theta: &AcdParams, data: &[f64], init: &InitialState) -> Result<f64> {
    check_inputs(theta, data)?;
    let (omega, alpha, beta) = (theta.omega(), theta.alpha(), theta.beta());
    let (mut x_prev, mut psi_prev) = (init.x0(), init.psi0());
    let mut total = CompensatedSum::default();
    for (i, &x) in data.iter().enumerate() {
        let psi = omega + alpha * x_prev + beta * psi_prev;
        let term = psi.ln() + x / psi;
        finite_step(i + 1, psi, term)?;
        total.add(term);
        x_prev = x;
        psi_prev = psi;
    }
    Ok(total.value())
}

/// Per-observation scores `xi_i`.
pub fn score_contributions(theta: &AcdParams, data: &[f64], init: &InitialState) -> Result<Vec<Vector3<f64>>> {
    check_inputs(theta, data)?;
    Recursion::new(theta, data, init)
        .enumerate()
        .map(|(i, step)| {
            let ratio = step.x / step.psi;
            finite_step(i + 1, step.psi, ratio)?;
            Ok(step.dpsi * ((1.0 - ratio) / step.psi))
        })
        .collect()
}

/// `(Omega_S_hat, Omega_I_hat) = (outer_sum / n, info_sum / n)`.
pub fn normalized_omegas(si: &ScoreInfo) -> (Matrix3<f64>, Matrix3<f64>) {
    let n = si.n.max(1) as f64;
    (si.outer_sum / n, si.info_sum / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innovation::InnovationLaw;
    use crate::simulate::{simulate_fixed_n, SimOptions};

    fn series(n: usize, seed: u64) -> Vec<f64> {
        let p = AcdParams::new(0.1, 0.2, 0.7).unwrap();
        simulate_fixed_n(&p, &InnovationLaw::Exponential, n, seed.into(), &SimOptions::default())
            .unwrap()
            .durations()
            .to_vec()
    }

    #[test]
    fn hand_recursion_with_negligible_beta() {
        let theta = AcdParams::new(0.5, 0.5, 1e-12).unwrap();
        let init = InitialState::new(1.0, 1.0).unwrap();
        let f = run_filter(&theta, &[1.0, 2.0], &init).unwrap();
        assert!((f.psi[0] - 1.0).abs() < 1e-11);
        assert!((f.psi[1] - 1.0).abs() < 1e-11);
        assert!((f.neg_loglik - 3.0).abs() < 1e-10);
    }

    #[test]
    fn neg_loglik_is_sum_of_terms() {
        let x = series(5000, 1);
        let theta = AcdParams::new(0.2, 0.1, 0.6).unwrap();
        let init = InitialState::new(1.0, 1.0).unwrap();
        let f = run_filter(&theta, &x, &init).unwrap();
        let naive: f64 = f.loglik_terms.iter().sum();
        assert!((f.neg_loglik - naive).abs() <= 1e-12 * naive.abs());
        let fast = neg_loglik(&theta, &x, &init).unwrap();
        assert_eq!(fast, f.neg_loglik);
        let (streamed, si) = evaluate(&theta, &x, &init).unwrap();
        assert_eq!(streamed, f.neg_loglik);
        assert_eq!(si, score_and_info(&f, &x).unwrap());
    }

    #[test]
    fn structural_invariants() {
        let x = series(2000, 2);
        let theta = AcdParams::new(0.1, 0.2, 0.7).unwrap();
        let init = InitialState::new(0.5, 0.5).unwrap();
        let f = run_filter(&theta, &x, &init).unwrap();
        for i in 0..f.len() {
            assert!(f.psi[i] >= theta.omega());
            let dw = f.dpsi[i][0];
            assert!((1.0..1.0 / (1.0 - theta.beta())).contains(&dw));
            let h = &f.d2psi[i];
            assert_eq!(h[(0, 0)], 0.0);
            assert_eq!(h[(0, 1)], 0.0);
            assert_eq!(h[(1, 0)], 0.0);
            assert_eq!(h[(1, 1)], 0.0);
            assert_eq!(h, &h.transpose());
        }
    }

    #[test]
    fn score_vanishes_when_duration_equals_psi() {
        let theta = AcdParams::new(0.5, 0.5, 1e-12).unwrap();
        let init = InitialState::new(1.0, 1.0).unwrap();
        let f = run_filter(&theta, &[1.0], &init).unwrap();
        let si = score_and_info(&f, &[1.0]).unwrap();
        assert!(si.score_sum.norm() < 1e-11);
        let (os, _) = normalized_omegas(&si);
        assert!(os.norm() < 1e-20);
    }

    #[test]
    fn outer_sum_is_psd_and_symmetric() {
        let x = series(3000, 4);
        let theta = AcdParams::new(0.15, 0.25, 0.6).unwrap();
        let init = InitialState::new(1.0, 1.0).unwrap();
        let (_, si) = evaluate(&theta, &x, &init).unwrap();
        assert_eq!(si.outer_sum, si.outer_sum.transpose());
        assert_eq!(si.info_sum, si.info_sum.transpose());
        let eig = si.outer_sum.symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l >= -1e-9 * si.outer_sum.norm()));
    }

    #[test]
    fn errors() {
        let theta = AcdParams::new(0.1, 0.2, 0.7).unwrap();
        let init = InitialState::new(1.0, 1.0).unwrap();
        assert!(run_filter(&theta, &[], &init).is_err());
        let f = run_filter(&theta, &[1.0, 2.0], &init).unwrap();
        assert_eq!(
            score_and_info(&f, &[1.0]).unwrap_err(),
            AcdError::DimensionMismatch { filter: 2, data: 1 }
        );
        let boundary = AcdParams::relaxed(0.1, 0.0, 0.7).unwrap();
        assert!(run_filter(&boundary, &[1.0], &init).is_err());
        assert_eq!(
            run_filter(&theta, &[1.0, f64::INFINITY, 1.0], &init).unwrap_err(),
            AcdError::FilterDivergence { index: 2 }
        );
    }

    #[test]
    fn init_strategies() {
        let x = [1.0, 2.0, 3.0];
        let start = AcdParams::new(0.1, 0.2, 0.7).unwrap();
        let init = InitStrategy::SampleMean.resolve(&x, &start).unwrap();
        assert_eq!((init.x0(), init.psi0()), (2.0, 2.0));
        let init = InitStrategy::ModelImplied.resolve(&x, &start).unwrap();
        assert!((init.psi0() - 1.0).abs() < 1e-12);
        let fixed = InitialState::new(3.0, 4.0).unwrap();
        assert_eq!(InitStrategy::Fixed(fixed).resolve(&x, &start).unwrap(), fixed);
        let explosive = AcdParams::new(0.1, 0.6, 0.7).unwrap();
        let init = InitStrategy::ModelImplied.resolve(&x, &explosive).unwrap();
        assert_eq!(init.psi0(), 2.0);
    }
}
