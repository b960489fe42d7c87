use std::path::{Path, PathBuf};
use std::time::Instant;

use acd_core::lab::{
    breakdown_demo, counting_rate_check, functional_clt_probe, normality_gates, rate_factor_probe, run_mc,
    BreakdownConfig, FcltConfig, Gate, McConfig, SampleMode,
};
use acd_core::{
    estimate as fit, simulate_fixed_n, simulate_horizon, AcdParams, DurationSeries, EstimateOptions, InitStrategy,
    InitialState, InnovationLaw, Reparam, RngSeed, SimOptions,
};
use serde::Serialize;
use serde_json::json;

use crate::durations::DurationsFile;
use crate::error::{CliError, CliResult};
use crate::manifest::{write_manifest, write_output};
use crate::report::{to_json, EstimateReport, SuiteReport};
use crate::{EstimateArgs, McArgs, ParamArgs, ReparamArg, SimulateArgs, Suite, OUT_DIR_ENV};

fn output_path(explicit: &Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        dir.join(default_name)
    })
}

fn resolve_params(args: &ParamArgs, default: [f64; 3]) -> CliResult<(AcdParams, InnovationLaw)> {
    let params = AcdParams::new(
        args.omega.unwrap_or(default[0]),
        args.alpha.unwrap_or(default[1]),
        args.beta.unwrap_or(default[2]),
    )?;
    let law = args.law.parse::<InnovationLaw>()?;
    Ok((params, law))
}

fn require_params(args: &ParamArgs) -> CliResult<(AcdParams, InnovationLaw)> {
    for (name, v) in [("omega", args.omega), ("alpha", args.alpha), ("beta", args.beta)] {
        if v.is_none() {
            return Err(CliError::Usage(format!("--{name} is required")));
        }
    }
    resolve_params(args, [0.0; 3])
}

fn finish(
    out: &Path,
    command: &str,
    args: &[String],
    config: serde_json::Value,
    seed: Option<u64>,
    started: Instant,
    body: &str,
) -> CliResult<()> {
    let digest = write_output(out, body.as_bytes())?;
    write_manifest(out, command, args, config, seed, started.elapsed(), vec![digest])?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn simulate(a: &SimulateArgs, argv: &[String]) -> CliResult<()> {
    let started = Instant::now();
    let (params, law) = require_params(&a.params)?;
    let opts = SimOptions {
        burn_in: a.burn_in,
        allow_nonstationary: a.allow_nonstationary,
        ..SimOptions::default()
    };
    let seed = RngSeed::derive(a.seed, a.stream);
    let series = match (a.horizon, a.n) {
        (Some(t), None) => simulate_horizon(&params, &law, t, seed, &opts)?,
        (None, Some(n)) => simulate_fixed_n(&params, &law, n, seed, &opts)?,
        _ => return Err(CliError::Usage("give exactly one of --horizon and --n".into())),
    };

    let mut header = vec![
        ("omega".to_string(), params.omega().to_string()),
        ("alpha".to_string(), params.alpha().to_string()),
        ("beta".to_string(), params.beta().to_string()),
        ("law".to_string(), law.to_string()),
        ("seed".to_string(), a.seed.to_string()),
        ("stream".to_string(), a.stream.to_string()),
    ];
    if let Some(t) = a.horizon {
        header.push(("horizon".to_string(), t.to_string()));
    }
    header.push(("n".to_string(), series.count().to_string()));
    if let Some(init) = series.initial_state() {
        header.push(("x0".to_string(), init.x0().to_string()));
        header.push(("psi0".to_string(), init.psi0().to_string()));
    }
    let file = DurationsFile {
        header,
        durations: series.durations().to_vec(),
    };

    let out = output_path(&a.out, "durations.txt");
    let config = json!({
        "params": params,
        "law": law.to_string(),
        "horizon": a.horizon,
        "n": a.n,
        "seed": a.seed,
        "stream": a.stream,
        "burn_in": a.burn_in,
        "allow_nonstationary": a.allow_nonstationary,
        "out": out.display().to_string(),
    });
    finish(&out, "simulate", argv, config, Some(a.seed), started, &file.render())
}

fn parse_init(spec: &str) -> CliResult<InitStrategy> {
    match spec {
        "sample-mean" => Ok(InitStrategy::SampleMean),
        "model" => Ok(InitStrategy::ModelImplied),
        other => {
            let bad = || {
                CliError::Usage(format!(
                    "--init must be sample-mean, fixed:X0,PSI0 or model, got '{other}'"
                ))
            };
            let rest = other.strip_prefix("fixed:").ok_or_else(bad)?;
            let (x0, psi0) = rest.split_once(',').ok_or_else(bad)?;
            let x0: f64 = x0.trim().parse().map_err(|_| bad())?;
            let psi0: f64 = psi0.trim().parse().map_err(|_| bad())?;
            Ok(InitStrategy::Fixed(InitialState::new(x0, psi0)?))
        }
    }
}

pub fn estimate(a: &EstimateArgs, argv: &[String]) -> CliResult<()> {
    let started = Instant::now();
    let options = EstimateOptions {
        max_iterations: a.max_iter,
        gradient_tolerance: a.tol,
        init_strategy: parse_init(&a.init)?,
        reparam: match a.reparam {
            ReparamArg::Log => Reparam::LogParams,
            ReparamArg::Raw => Reparam::Raw,
        },
        ..EstimateOptions::default()
    };
    options.validate()?;
    let file = DurationsFile::read(&a.data)?;
    let data_seed = file.header_value("seed").and_then(|s| s.parse().ok());
    let series = DurationSeries::from_durations(file.durations, a.horizon)?;
    let result = fit(&series, &options)?;
    let report = EstimateReport::new(a.data.display().to_string(), &result);

    let out = output_path(&a.out, "estimate.json");
    let config = json!({
        "data": a.data.display().to_string(),
        "horizon": a.horizon,
        "init": a.init,
        "tol": a.tol,
        "max_iter": a.max_iter,
        "reparam": format!("{:?}", a.reparam).to_lowercase(),
        "out": out.display().to_string(),
    });
    finish(&out, "estimate", argv, config, data_seed, started, &to_json(&report))
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Normality => "normality",
        Suite::CountingRate => "counting-rate",
        Suite::RateFactor => "rate-factor",
        Suite::Fclt => "fclt",
        Suite::Breakdown => "breakdown",
    }
}

/// Writes the suite envelope, then turns a failed gate into exit code 4.
fn finish_suite<R: Serialize, C: Serialize>(
    a: &McArgs,
    argv: &[String],
    started: Instant,
    config: &C,
    gates: Vec<Gate>,
    report: R,
) -> CliResult<()> {
    let name = suite_name(a.suite);
    let envelope = SuiteReport::new(name, gates, report);
    let out = output_path(&a.out, &format!("mc-{name}.json"));
    let config = json!({ "suite": name, "settings": config, "out": out.display().to_string() });
    finish(&out, "mc", argv, config, Some(a.seed), started, &to_json(&envelope))?;
    let failed: Vec<&str> = envelope
        .gates
        .iter()
        .filter(|g| !g.passed)
        .map(|g| g.name.as_str())
        .collect();
    println!("suite {name}: {}", if failed.is_empty() { "pass" } else { "fail" });
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Gate(failed.join(", ")))
    }
}

pub fn mc(a: &McArgs, argv: &[String]) -> CliResult<()> {
    let started = Instant::now();
    match a.suite {
        Suite::Normality => {
            let (params, law) = resolve_params(&a.params, [0.1, 0.2, 0.7])?;
            let mut config = McConfig::horizon(params, law, a.horizon.unwrap_or(2000.0), a.reps, a.seed);
            if let Some(n) = a.n {
                if a.horizon.is_some() {
                    return Err(CliError::Usage("give at most one of --horizon and --n".into()));
                }
                config.mode = SampleMode::FixedN(n);
            }
            config.nominal_coverage = a.nominal_coverage;
            let report = run_mc(&config)?;
            let gates = normality_gates(&report);
            finish_suite(a, argv, started, &config, gates, report)
        }
        Suite::CountingRate => {
            let (params, law) = resolve_params(&a.params, [0.1, 0.2, 0.7])?;
            let horizons = match &a.horizons {
                Some(h) => h.clone(),
                None => {
                    let last = a.horizon.unwrap_or(1e4);
                    if last > 100.0 {
                        vec![100.0, last]
                    } else {
                        vec![last]
                    }
                }
            };
            let summary = counting_rate_check(&params, &law, &horizons, a.reps, a.seed)?;
            let first = &summary.rows[0];
            let last = &summary.rows[summary.rows.len() - 1];
            let mut gates = vec![Gate::below(
                format!("mean_abs_deviation_T{}", last.horizon),
                last.mean_abs_deviation,
                0.02,
            )];
            if summary.rows.len() > 1 {
                gates.push(Gate::below(
                    "max_abs_deviation_last_over_first",
                    last.max_abs_deviation / first.max_abs_deviation,
                    1.0,
                ));
            }
            let config = json!({ "params": params, "law": law.to_string(), "horizons": horizons, "reps": a.reps, "seed": a.seed });
            finish_suite(a, argv, started, &config, gates, summary)
        }
        Suite::RateFactor => {
            let (params, law) = resolve_params(&a.params, [2.0, 0.05, 0.55])?;
            let mut config = McConfig::horizon(params, law, a.horizon.unwrap_or(5000.0), a.reps, a.seed);
            config.nominal_coverage = a.nominal_coverage;
            let report = rate_factor_probe(&config, a.reference_n.unwrap_or(1_000_000))?;
            let gates = vec![
                Gate::within("winner_over_runner_up", report.runner_up_ratio, 0.0, 0.5),
                Gate::below("identity_relative_error", report.identity_relative_error, 0.1),
            ];
            finish_suite(a, argv, started, &config, gates, report)
        }
        Suite::Fclt => {
            let (params, law) = resolve_params(&a.params, [0.1, 0.2, 0.7])?;
            let mut config = FcltConfig::new(params, law, a.n.unwrap_or(10_000), a.reps, a.seed);
            if let Some(g) = &a.grid {
                config.grid = g.clone();
            }
            if let Some(r) = a.reference_n {
                config.reference_n = r;
            }
            let summary = functional_clt_probe(&config)?;
            let mut gates: Vec<Gate> = summary
                .fractions
                .iter()
                .map(|f| {
                    Gate::below(
                        format!("covariance_u{}", f.u),
                        f.relative_error,
                        config.covariance_tolerance,
                    )
                })
                .collect();
            gates.extend(summary.increments.iter().map(|r| {
                Gate::below(
                    format!("increment_correlation_u{}_v{}", r.u, r.v),
                    r.max_abs_correlation,
                    r.band,
                )
            }));
            if config.grid.contains(&0.0) {
                let exact = if summary.zero_start_exact { 0.0 } else { 1.0 };
                gates.push(Gate::within("zero_start_exact", exact, 0.0, 0.0));
            }
            finish_suite(a, argv, started, &config, gates, summary)
        }
        Suite::Breakdown => {
            let (params, law) = resolve_params(&a.params, [0.1, 1.2, 0.4])?;
            let mut config = BreakdownConfig::new(params, law, a.reps, a.seed);
            if let Some(h) = &a.horizons {
                config.horizons = h.clone();
            }
            let report = breakdown_demo(&config)?;
            finish_suite(a, argv, started, &config, Vec::new(), report)
        }
    }
}
