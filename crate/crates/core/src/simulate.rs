//! Simulation of ACD(1,1) durations, either to a fixed count or over a
//! calendar horizon `[0, T]` with a random count `n(T)`.
//!
//! Both modes draw innovations from the same stream in the same order, so a
//! horizon series is exactly the `n(T)`-prefix of a fixed-count series built
//! from the same seed and options.

use serde::{Deserialize, Serialize};

use crate::error::{AcdError, Result};
use crate::innovation::{InnovationLaw, InnovationSampler};
use crate::params::{AcdParams, InitialState};
use crate::rng::{RandomStream, RngSeed};

pub const DEFAULT_BURN_IN: usize = 500;
pub const DEFAULT_PSI_CAP: f64 = 1e300;

/// Observed durations together with their event times and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationSeries {
    durations: Vec<f64>,
    event_times: Vec<f64>,
    horizon: Option<f64>,
    true_params: Option<AcdParams>,
    seed: Option<RngSeed>,
    /// State `(x_0, psi_0)` that generated the first recorded duration.
    initial_state: Option<InitialState>,
    /// The discarded duration that crossed the horizon.
    overshoot: Option<f64>,
}

impl DurationSeries {
    /// Wraps observed durations. All must be finite and strictly positive,
    /// and the last event time must not exceed `horizon` when given.
    pub fn from_durations(durations: Vec<f64>, horizon: Option<f64>) -> Result<Self> {
        if let Some((index, &value)) = durations
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x > 0.0))
        {
            return Err(AcdError::InvalidDuration { index, value });
        }
        let event_times = cumulative(&durations);
        if let Some(t) = horizon {
            if !(t.is_finite() && t > 0.0) {
                return Err(AcdError::InvalidParameter {
                    name: "horizon",
                    value: t,
                    reason: "must be finite and > 0",
                });
            }
            if let Some(&last) = event_times.last() {
                if last > t {
                    return Err(AcdError::InvalidConfig(format!(
                        "last event time {last} exceeds horizon {t}"
                    )));
                }
            }
        }
        Ok(Self {
            durations,
            event_times,
            horizon,
            true_params: None,
            seed: None,
            initial_state: None,
            overshoot: None,
        })
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn horizon(&self) -> Option<f64> {
        self.horizon
    }

    /// `n` for fixed-count series, `n(T)` for horizon series.
    pub fn count(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    pub fn true_params(&self) -> Option<&AcdParams> {
        self.true_params.as_ref()
    }

    pub fn seed(&self) -> Option<RngSeed> {
        self.seed
    }

    pub fn initial_state(&self) -> Option<InitialState> {
        self.initial_state
    }

    pub fn overshoot(&self) -> Option<f64> {
        self.overshoot
    }

    /// Last event time, or the horizon when present.
    pub fn span(&self) -> f64 {
        self.horizon.or_else(|| self.event_times.last().copied()).unwrap_or(0.0)
    }

    pub fn mean_duration(&self) -> f64 {
        self.event_times.last().copied().unwrap_or(0.0) / self.durations.len().max(1) as f64
    }
}

fn cumulative(durations: &[f64]) -> Vec<f64> {
    durations
        .iter()
        .scan(0.0, |t, &x| {
            *t += x;
            Some(*t)
        })
        .collect()
}

/// Simulation settings shared by both modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// `None`: 500 for finite-mean parameters, 0 otherwise.
    pub burn_in: Option<usize>,
    /// `None`: [`InitialState::default_for`].
    pub init: Option<InitialState>,
    pub psi_cap: f64,
    pub allow_nonstationary: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            burn_in: None,
            init: None,
            psi_cap: DEFAULT_PSI_CAP,
            allow_nonstationary: false,
        }
    }
}

impl SimOptions {
    pub fn nonstationary() -> Self {
        Self {
            allow_nonstationary: true,
            ..Self::default()
        }
    }

    fn burn_in_for(&self, params: &AcdParams) -> usize {
        self.burn_in
            .unwrap_or(if params.finite_mean() { DEFAULT_BURN_IN } else { 0 })
    }
}

/// Sequential generator of `(x_i, psi_i)` pairs.
pub(crate) struct Path {
    params: AcdParams,
    sampler: InnovationSampler,
    rng: RandomStream,
    x_prev: f64,
    psi_prev: f64,
    step: usize,
    psi_cap: f64,
}

impl Path {
    pub(crate) fn new(params: &AcdParams, law: &InnovationLaw, seed: RngSeed, opts: &SimOptions) -> Result<Self> {
        if !(opts.psi_cap > 0.0) {
            return Err(AcdError::InvalidConfig(format!(
                "psi cap must be positive, got {}",
                opts.psi_cap
            )));
        }
        let init = opts.init.unwrap_or_else(|| InitialState::default_for(params));
        let mut path = Self {
            params: *params,
            sampler: law.sampler(),
            rng: seed.stream(),
            x_prev: init.x0(),
            psi_prev: init.psi0(),
            step: 0,
            psi_cap: opts.psi_cap,
        };
        for _ in 0..opts.burn_in_for(params) {
            path.next_duration()?;
        }
        Ok(path)
    }

    fn state(&self) -> InitialState {
        InitialState::new(self.x_prev, self.psi_prev).expect("simulated state is positive")
    }

    pub(crate) fn next_duration(&mut self) -> Result<f64> {
        self.step += 1;
        let p = &self.params;
        let psi = p.omega() + p.alpha() * self.x_prev + p.beta() * self.psi_prev;
        if !(psi <= self.psi_cap) {
            return Err(AcdError::Explosion {
                index: self.step,
                value: psi,
                cap: self.psi_cap,
            });
        }
        let x = psi * self.sampler.draw(&mut self.rng);
        if !(x > 0.0 && x.is_finite()) {
            return Err(AcdError::InvalidDuration {
                index: self.step,
                value: x,
            });
        }
        self.x_prev = x;
        self.psi_prev = psi;
        Ok(x)
    }
}

fn check_admissible(params: &AcdParams, opts: &SimOptions) -> Result<()> {
    if !params.finite_mean() && !opts.allow_nonstationary {
        return Err(AcdError::InfiniteMean {
            persistence: params.persistence(),
        });
    }
    Ok(())
}

/// Simulates exactly `n` durations.
pub fn simulate_fixed_n(
    params: &AcdParams,
    law: &InnovationLaw,
    n: usize,
    seed: RngSeed,
    opts: &SimOptions,
) -> Result<DurationSeries> {
    if n == 0 {
        return Err(AcdError::InvalidConfig("n must be at least 1".into()));
    }
    let mut path = Path::new(params, law, seed, opts)?;
    let initial_state = path.state();
    let durations = (0..n).map(|_| path.next_duration()).collect::<Result<Vec<_>>>()?;
    Ok(DurationSeries {
        event_times: cumulative(&durations),
        durations,
        horizon: None,
        true_params: Some(*params),
        seed: Some(seed),
        initial_state: Some(initial_state),
        overshoot: None,
    })
}

/// Simulates every event in `[0, horizon]`. The first duration that would
/// cross the horizon is drawn, kept as [`DurationSeries::overshoot`], and
/// not recorded.
pub fn simulate_horizon(
    params: &AcdParams,
    law: &InnovationLaw,
    horizon: f64,
    seed: RngSeed,
    opts: &SimOptions,
) -> Result<DurationSeries> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(AcdError::InvalidParameter {
            name: "horizon",
            value: horizon,
            reason: "must be finite and > 0",
        });
    }
    check_admissible(params, opts)?;
    let mut path = Path::new(params, law, seed, opts)?;
    let initial_state = path.state();
    let mut durations = Vec::new();
    let mut event_times = Vec::new();
    let mut t = 0.0;
    let overshoot = loop {
        let x = path.next_duration()?;
        if t + x > horizon {
            break x;
        }
        t += x;
        durations.push(x);
        event_times.push(t);
    };
    if durations.is_empty() {
        return Err(AcdError::EmptySeries {
            horizon,
            first_duration: overshoot,
        });
    }
    Ok(DurationSeries {
        durations,
        event_times,
        horizon: Some(horizon),
        true_params: Some(*params),
        seed: Some(seed),
        initial_state: Some(initial_state),
        overshoot: Some(overshoot),
    })
}

/// `n(T)` without materializing the series; zero is a valid outcome here.
pub fn count_events(
    params: &AcdParams,
    law: &InnovationLaw,
    horizon: f64,
    seed: RngSeed,
    opts: &SimOptions,
) -> Result<usize> {
    check_admissible(params, opts)?;
    let mut path = Path::new(params, law, seed, opts)?;
    let mut t = 0.0;
    let mut n = 0;
    loop {
        t += path.next_duration()?;
        if t > horizon {
            return Ok(n);
        }
        n += 1;
    }
}

/// Monte Carlo estimate of `E[ln(alpha * eps + beta)]` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl LyapunovEstimate {
    /// Negative estimate: strictly stationary and ergodic region.
    pub fn is_contractive(&self) -> bool {
        self.estimate < 0.0
    }
}

pub fn lyapunov_exponent(
    params: &AcdParams,
    law: &InnovationLaw,
    n_draws: usize,
    seed: RngSeed,
) -> Result<LyapunovEstimate> {
    if params.alpha() == 0.0 {
        return Ok(LyapunovEstimate {
            estimate: params.beta().ln(),
            std_error: 0.0,
        });
    }
    if n_draws < 10_000 {
        return Err(AcdError::InvalidConfig(format!(
            "Lyapunov estimate needs at least 10^4 draws, got {n_draws}"
        )));
    }
    let sampler = law.sampler();
    let mut rng = seed.stream();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_draws {
        let v = (params.alpha() * sampler.draw(&mut rng) + params.beta()).ln();
        sum += v;
        sum_sq += v * v;
    }
    let n = n_draws as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    Ok(LyapunovEstimate {
        estimate: mean,
        std_error: (var.max(0.0) / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_test_exponential;

    fn base() -> AcdParams {
        AcdParams::new(0.1, 0.2, 0.7).unwrap()
    }

    #[test]
    fn fixed_n_is_deterministic() {
        let law = InnovationLaw::Exponential;
        let a = simulate_fixed_n(&base(), &law, 1000, 5.into(), &SimOptions::default()).unwrap();
        let b = simulate_fixed_n(&base(), &law, 1000, 5.into(), &SimOptions::default()).unwrap();
        assert_eq!(a, b);
        let c = simulate_fixed_n(&base(), &law, 1000, 6.into(), &SimOptions::default()).unwrap();
        assert_ne!(a.durations(), c.durations());
    }

    #[test]
    fn near_iid_limit_is_unit_exponential() {
        let p = AcdParams::new(1.0, 1e-12, 1e-12).unwrap();
        let s = simulate_fixed_n(
            &p,
            &InnovationLaw::Exponential,
            10_000,
            21.into(),
            &SimOptions::default(),
        )
        .unwrap();
        let ks = ks_test_exponential(s.durations());
        assert!(ks.p_value > 0.01, "KS p-value {}", ks.p_value);
    }

    #[test]
    fn sample_mean_matches_stationary_mean() {
        let s = simulate_fixed_n(
            &base(),
            &InnovationLaw::Exponential,
            1_000_000,
            3.into(),
            &SimOptions::default(),
        )
        .unwrap();
        assert!((s.mean_duration() - 1.0).abs() < 0.02, "{}", s.mean_duration());
        assert!(s.durations().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn horizon_counting_identity_and_prefix() {
        let law = InnovationLaw::Exponential;
        let opts = SimOptions::default();
        let h = simulate_horizon(&base(), &law, 500.0, 8.into(), &opts).unwrap();
        let n = h.count();
        let last = *h.event_times().last().unwrap();
        assert!(last <= 500.0);
        assert!(last + h.overshoot().unwrap() > 500.0);

        let f = simulate_fixed_n(&base(), &law, n + 10, 8.into(), &opts).unwrap();
        assert_eq!(&f.durations()[..n], h.durations());
        assert_eq!(f.durations()[n], h.overshoot().unwrap());
        assert_eq!(f.initial_state(), h.initial_state());
        assert_eq!(count_events(&base(), &law, 500.0, 8.into(), &opts).unwrap(), n);
    }

    #[test]
    fn horizon_rate_near_inverse_mean() {
        let law = InnovationLaw::Exponential;
        let h = simulate_horizon(&base(), &law, 1e4, 1.into(), &SimOptions::default()).unwrap();
        let rate = h.count() as f64 / 1e4;
        assert!((0.9..=1.1).contains(&rate), "n(T)/T = {rate}");
    }

    #[test]
    fn tiny_horizon_is_empty_series() {
        let err = simulate_horizon(
            &base(),
            &InnovationLaw::Exponential,
            1e-9,
            1.into(),
            &SimOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, AcdError::EmptySeries { .. }));
        assert_eq!(
            count_events(
                &base(),
                &InnovationLaw::Exponential,
                1e-9,
                1.into(),
                &SimOptions::default()
            )
            .unwrap(),
            0
        );
    }

    #[test]
    fn horizon_requires_finite_mean_unless_allowed() {
        let p = AcdParams::new(0.1, 1.2, 0.4).unwrap();
        let law = InnovationLaw::Exponential;
        assert!(matches!(
            simulate_horizon(&p, &law, 100.0, 1.into(), &SimOptions::default()),
            Err(AcdError::InfiniteMean { .. })
        ));
        assert!(simulate_horizon(&p, &law, 100.0, 1.into(), &SimOptions::nonstationary()).is_ok());
    }

    #[test]
    fn explosive_params_hit_the_cap() {
        let p = AcdParams::new(1.0, 3.0, 1.0).unwrap();
        let err = simulate_fixed_n(
            &p,
            &InnovationLaw::Exponential,
            100_000,
            2.into(),
            &SimOptions::nonstationary(),
        )
        .unwrap_err();
        assert!(matches!(err, AcdError::Explosion { .. }), "{err}");

        let opts = SimOptions {
            psi_cap: 1e6,
            ..SimOptions::nonstationary()
        };
        match simulate_fixed_n(&p, &InnovationLaw::Exponential, 10_000, 2.into(), &opts) {
            Err(AcdError::Explosion { index, cap, .. }) => {
                assert!(index > 0);
                assert_eq!(cap, 1e6);
            }
            other => panic!("expected explosion, got {other:?}"),
        }
    }

    #[test]
    fn burn_in_and_init_are_respected() {
        let law = InnovationLaw::Exponential;
        let init = InitialState::new(3.0, 2.0).unwrap();
        let opts = SimOptions {
            burn_in: Some(0),
            init: Some(init),
            ..SimOptions::default()
        };
        let s = simulate_fixed_n(&base(), &law, 5, 4.into(), &opts).unwrap();
        assert_eq!(s.initial_state(), Some(init));
        let burned = SimOptions {
            burn_in: Some(3),
            ..opts
        };
        let b = simulate_fixed_n(&base(), &law, 2, 4.into(), &burned).unwrap();
        // Burn-in consumes the first three draws of the same stream.
        assert_eq!(b.durations()[..2], s.durations()[3..5]);
    }

    #[test]
    fn from_durations_validates() {
        let err = DurationSeries::from_durations(vec![1.0, 2.0, 0.0], None).unwrap_err();
        assert_eq!(err, AcdError::InvalidDuration { index: 2, value: 0.0 });
        assert!(DurationSeries::from_durations(vec![1.0, 2.0], Some(2.5)).is_err());
        let s = DurationSeries::from_durations(vec![1.0, 2.0], Some(3.5)).unwrap();
        assert_eq!(s.event_times(), &[1.0, 3.0]);
        assert_eq!(s.span(), 3.5);
    }

    /// Composite Simpson on (0, upper] for integrands against e^{-u}.
    fn expectation_exponential(f: impl Fn(f64) -> f64) -> f64 {
        let (a, b, m) = (0.0, 60.0, 600_000);
        let h: f64 = (b - a) / m as f64;
        let g = |u: f64| f(u) * (-u).exp();
        let mut s = g(a) + g(b);
        for i in 1..m {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn lyapunov_against_quadrature() {
        let law = InnovationLaw::Exponential;
        let quad = expectation_exponential(|u| (0.2 * u + 0.7).ln());
        let est = lyapunov_exponent(&base(), &law, 200_000, 17.into()).unwrap();
        assert!(
            (est.estimate - quad).abs() < 3.0 * est.std_error,
            "{} vs {quad} (se {})",
            est.estimate,
            est.std_error
        );
        assert!(est.is_contractive());

        // alpha + beta = 1.1 with a negative exponent: stationary, infinite mean.
        let p = AcdParams::new(0.1, 0.9, 0.2).unwrap();
        let quad = expectation_exponential(|u| (0.9 * u + 0.2).ln());
        let est = lyapunov_exponent(&p, &law, 200_000, 18.into()).unwrap();
        assert!(quad < 0.0, "quadrature {quad}");
        assert!(est.is_contractive());
        assert!((est.estimate - quad).abs() < 3.0 * est.std_error);

        // alpha = 1.2, beta = 0.4 sits on the explosive side: E ln(1.2 eps + 0.4) > 0.
        let p = AcdParams::new(0.1, 1.2, 0.4).unwrap();
        let quad = expectation_exponential(|u| (1.2 * u + 0.4).ln());
        let est = lyapunov_exponent(&p, &law, 200_000, 20.into()).unwrap();
        assert!(quad > 0.2, "quadrature {quad}");
        assert!(!est.is_contractive());
        assert!((est.estimate - quad).abs() < 3.0 * est.std_error);

        let p = AcdParams::new(0.1, 3.0, 1.0).unwrap();
        let quad = expectation_exponential(|u| (3.0 * u + 1.0).ln());
        let est = lyapunov_exponent(&p, &law, 100_000, 19.into()).unwrap();
        assert!(quad > 0.0 && !est.is_contractive());
    }

    #[test]
    fn lyapunov_degenerate_alpha_zero() {
        let p = AcdParams::relaxed(1.0, 0.0, 0.5).unwrap();
        let est = lyapunov_exponent(&p, &InnovationLaw::Exponential, 0, 1.into()).unwrap();
        assert_eq!(est.estimate, 0.5f64.ln());
        assert_eq!(est.std_error, 0.0);
        assert!(lyapunov_exponent(&base(), &InnovationLaw::Exponential, 100, 1.into()).is_err());
    }
}
