//! ACD(1,1) duration model with exponential quasi-maximum-likelihood
//! estimation over a calendar horizon, and a Monte Carlo lab for checking
//! the estimator's large-sample behaviour when the number of durations
//! `n(T)` in `[0, T]` is random.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod filter;
pub mod innovation;
pub mod lab;
pub mod params;
pub mod qmle;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use error::{AcdError, Result};
pub use filter::{
    evaluate, neg_loglik, normalized_omegas, run_filter, score_and_info, score_contributions, FilterOutput,
    InitStrategy, ScoreInfo,
};
pub use innovation::{draw_innovation, InnovationLaw};
pub use params::{stationary_mean, AcdParams, InitialState};
pub use qmle::{default_start, estimate, sandwich_covariances, EstimateOptions, EstimateResult, Reparam, Sandwich};
pub use rng::{RandomStream, RngSeed};
pub use simulate::{
    count_events, lyapunov_exponent, simulate_fixed_n, simulate_horizon, DurationSeries, LyapunovEstimate, SimOptions,
};
