use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn acd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_acd"));
    c.env_remove("ACD_OUT_DIR");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn simulate_into(path: &Path, extra: &[&str]) -> Output {
    let mut c = acd();
    c.args([
        "simulate",
        "--omega",
        "0.1",
        "--alpha",
        "0.2",
        "--beta",
        "0.7",
        "--law",
        "exponential",
        "--seed",
        "7",
    ])
    .args(extra)
    .arg("--out")
    .arg(path);
    run(&mut c)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_header_and_rows() {
    let dir = scratch("simulate");
    let path = dir.join("d.txt");
    let out = simulate_into(&path, &["--horizon", "2000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("#horizon=2000\n"));
    assert!(text.contains("#seed=7\n"));
    let n: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("#n="))
        .unwrap()
        .parse()
        .unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, n);
    let total: f64 = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.parse::<f64>().unwrap())
        .sum();
    assert!(total <= 2000.0);
    let manifest = json(&dir.join("d.txt.manifest.json"));
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 7);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch("rerun");
    let a = dir.join("a.txt");
    let b = dir.join("b.txt");
    simulate_into(&a, &["--n", "3000"]);
    simulate_into(&b, &["--n", "3000"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    for (data, report) in [(&a, dir.join("a.json")), (&b, dir.join("b.json"))] {
        let out = run(acd().args(["estimate", "--data"]).arg(data).arg("--out").arg(&report));
        assert_eq!(code(&out), 0);
    }
    let ra = fs::read_to_string(dir.join("a.json")).unwrap();
    let rb = fs::read_to_string(dir.join("b.json")).unwrap();
    assert_eq!(ra.replace("a.txt", "b.txt"), rb);
}

#[test]
fn estimate_report_on_simulated_data() {
    let dir = scratch("estimate");
    let data = dir.join("d.txt");
    simulate_into(&data, &["--horizon", "2000"]);
    let report = dir.join("e.json");
    let out = run(acd().args(["estimate", "--data"]).arg(&data).arg("--out").arg(&report));
    assert_eq!(code(&out), 0);
    let r = json(&report);
    assert_eq!(r["stationarity_flag"], true);
    assert_eq!(r["convergence"]["converged"], true);
    assert_eq!(r["horizon_inferred"], true);
    assert_eq!(r["theta_hat"].as_array().unwrap().len(), 3);
    assert!(r["covariance"]["cov_per_time"].is_array());

    let with_t = dir.join("t.json");
    run(acd()
        .args(["estimate", "--horizon", "2000", "--data"])
        .arg(&data)
        .arg("--out")
        .arg(&with_t));
    let r = json(&with_t);
    assert_eq!(r["horizon_inferred"], false);
    assert_eq!(r["horizon"], 2000.0);
}

#[test]
fn initialization_is_irrelevant_at_large_n() {
    let dir = scratch("init");
    let data = dir.join("d.txt");
    simulate_into(&data, &["--n", "100000"]);
    let mut thetas = Vec::new();
    for (init, name) in [("sample-mean", "a.json"), ("fixed:1.0,1.0", "b.json")] {
        let report = dir.join(name);
        let out = run(acd()
            .args(["estimate", "--init", init, "--data"])
            .arg(&data)
            .arg("--out")
            .arg(&report));
        assert_eq!(code(&out), 0);
        let theta: Vec<f64> = json(&report)["theta_hat"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        thetas.push(theta);
    }
    for (a, b) in thetas[0].iter().zip(&thetas[1]) {
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    }
}

#[test]
fn zero_duration_cites_its_line() {
    let dir = scratch("zero");
    let data = dir.join("bad.txt");
    fs::write(&data, "#seed=1\n0.4\n0\n1.2\n").unwrap();
    let out = run(acd()
        .args(["estimate", "--data"])
        .arg(&data)
        .arg("--out")
        .arg(dir.join("x.json")));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = run(acd().args(["estimate", "--data"]).arg(dir.join("missing.txt")));
    assert_eq!(code(&out), 2);
}

#[test]
fn invalid_flags_exit_one() {
    let dir = scratch("flags");
    let out = run(acd()
        .args([
            "simulate",
            "--omega",
            "0.1",
            "--alpha",
            "0",
            "--beta",
            "0.7",
            "--horizon",
            "10",
        ])
        .current_dir(&dir));
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
    let out = run(acd()
        .args(["simulate", "--omega", "0.1", "--alpha", "0.2", "--beta", "0.7"])
        .current_dir(&dir));
    assert_eq!(code(&out), 1);
    let out = run(acd().args(["mc", "--suite", "nonsense"]).current_dir(&dir));
    assert_eq!(code(&out), 1);
    let out = run(acd()
        .args([
            "simulate",
            "--omega",
            "0.1",
            "--alpha",
            "0.6",
            "--beta",
            "0.5",
            "--horizon",
            "10",
        ])
        .current_dir(&dir));
    assert_eq!(code(&out), 1);
    let out = run(acd()
        .args(["estimate", "--init", "fixed:1", "--data", "x"])
        .current_dir(&dir));
    assert_eq!(code(&out), 1);
    assert_eq!(code(&run(acd().arg("--help"))), 0);
}

#[test]
fn empty_series_is_reported() {
    let dir = scratch("empty");
    let out = simulate_into(&dir.join("d.txt"), &["--horizon", "1e-9"]);
    assert_eq!(code(&out), 2);
    assert!(!dir.join("d.txt").exists());
}

#[test]
fn out_dir_from_environment() {
    let dir = scratch("envdir");
    let out = run(acd().env("ACD_OUT_DIR", &dir).args([
        "simulate", "--omega", "0.1", "--alpha", "0.2", "--beta", "0.7", "--n", "50",
    ]));
    assert_eq!(code(&out), 0);
    assert!(dir.join("durations.txt").exists());
    assert!(dir.join("durations.txt.manifest.json").exists());
}

#[test]
fn rate_factor_refuses_unit_mean() {
    let dir = scratch("rf");
    let out = run(acd()
        .args([
            "mc",
            "--suite",
            "rate-factor",
            "--omega",
            "0.1",
            "--alpha",
            "0.2",
            "--beta",
            "0.7",
            "--reps",
            "5",
        ])
        .arg("--out")
        .arg(dir.join("rf.json")));
    assert_ne!(code(&out), 0);
    assert!(!dir.join("rf.json").exists());
}

#[test]
fn single_replication_normality_run() {
    let dir = scratch("mc1");
    let report = dir.join("n.json");
    let out = run(acd()
        .args(["mc", "--suite", "normality", "--reps", "1", "--horizon", "500"])
        .arg("--out")
        .arg(&report));
    assert_eq!(code(&out), 0);
    let r = json(&report);
    assert_eq!(r["passed"], true);
    assert_eq!(r["report"]["per_replication"].as_array().unwrap().len(), 1);
    assert!(r["report"]["empirical_cov_sqrtT"].is_null());
}

#[test]
fn counting_rate_suite_for_mean_five() {
    let dir = scratch("count");
    let report = dir.join("c.json");
    let out = run(acd()
        .args([
            "mc",
            "--suite",
            "counting-rate",
            "--omega",
            "2",
            "--alpha",
            "0.05",
            "--beta",
            "0.55",
        ])
        .args(["--horizon", "10000", "--reps", "100", "--seed", "1"])
        .arg("--out")
        .arg(&report));
    assert!(matches!(code(&out), 0 | 4));
    let r = json(&report);
    let rows = r["report"]["rows"].as_array().unwrap();
    let rate = rows.last().unwrap()["mean_rate"].as_f64().unwrap();
    assert!((rate - 0.2).abs() < 0.02 * 0.2, "rate {rate}");
}

#[test]
fn gate_failure_exits_four() {
    let dir = scratch("gate");
    let report = dir.join("f.json");
    let out = run(acd()
        .args([
            "mc",
            "--suite",
            "fclt",
            "--n",
            "200",
            "--reps",
            "4",
            "--reference-n",
            "1000",
        ])
        .arg("--out")
        .arg(&report));
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&report)["passed"], false);
}

#[test]
fn breakdown_suite_rejects_explosive_parameters() {
    let out = run(acd().args([
        "mc",
        "--suite",
        "breakdown",
        "--omega",
        "0.1",
        "--alpha",
        "3",
        "--beta",
        "1",
        "--reps",
        "2",
    ]));
    assert_eq!(code(&out), 1);
}
