use acd_core::lab::{
    breakdown_demo, counting_rate_check, normality_gates, run_mc, BreakdownConfig, McConfig, SampleMode,
};
use acd_core::{AcdParams, InnovationLaw};

fn base_config(reps: usize, horizon: f64) -> McConfig {
    McConfig::horizon(
        AcdParams::new(0.1, 0.2, 0.7).unwrap(),
        InnovationLaw::Exponential,
        horizon,
        reps,
        2024,
    )
}

#[test]
fn report_does_not_depend_on_thread_count() {
    let config = base_config(24, 500.0);
    let run_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_mc(&config).unwrap())
    };
    assert_eq!(run_with(1), run_with(4));
}

#[test]
fn moderate_run_is_close_to_normal() {
    let reps = 200;
    let report = run_mc(&base_config(reps, 2000.0)).unwrap();
    assert_eq!(report.per_replication.len(), reps);
    assert!(report.convergence_rate >= 0.98);
    assert!(!normality_gates(&report).is_empty());
    // Null 1% critical value of the KS distance at this sample size.
    let critical = 1.63 / (reps as f64).sqrt();
    for ks in report.normality_stats.unwrap() {
        assert!(ks.statistic < critical, "{ks:?}");
    }
    for c in report.coverage.unwrap() {
        assert!((0.89..=0.99).contains(&c), "coverage {c}");
    }
}

#[test]
fn fixed_count_mode_uses_event_span() {
    let mut config = base_config(8, 1.0);
    config.mode = SampleMode::FixedN(400);
    let report = run_mc(&config).unwrap();
    assert!(report.counting_rate.is_none());
    for rec in &report.per_replication {
        assert_eq!(rec.count, 400);
        assert!(rec.span > 0.0);
    }
}

#[test]
fn counting_deviation_shrinks_with_horizon() {
    let p = AcdParams::new(2.0, 0.05, 0.55).unwrap();
    let s = counting_rate_check(&p, &InnovationLaw::Exponential, &[1e2, 1e4], 100, 1).unwrap();
    assert!(s.decreasing);
    assert!((s.rows[1].mean_rate - 0.2).abs() < 0.2 * 0.02);
}

#[test]
fn breakdown_rejects_non_contractive_parameters() {
    let c = BreakdownConfig::new(AcdParams::new(0.1, 1.2, 0.4).unwrap(), InnovationLaw::Exponential, 4, 1);
    let err = breakdown_demo(&c).unwrap_err();
    assert!(matches!(err, acd_core::AcdError::NotErgodic { estimate, .. } if estimate > 0.2));
}
