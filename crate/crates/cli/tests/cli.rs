use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn equilox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equilox"))
        .args(args)
        .env_remove("EQUILOX_SOLVER")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(equilox(&["--help"]).status.code(), Some(0));
    assert_eq!(equilox(&["--version"]).status.code(), Some(0));
    assert_eq!(equilox(&["run", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(equilox(&[]).status.code(), Some(3));
    assert_eq!(equilox(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(equilox(&["run", "tiny.json", "minmax"]).status.code(), Some(3));
    assert_eq!(equilox(&["run", "tiny.json", "sp", "--clusters", "0,1"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    assert_eq!(equilox(&["run", "tiny.json", "--out", arg(&out)]).status.code(), Some(3));
    assert_eq!(manifest(&out.join("manifest.json"))["exit_code"], 3);
    let o = equilox(&["run", "tiny.json", "ginic", "--clusters", "1,1,1", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validate_reports_findings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = equilox(&["validate", "tiny.json", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ok"));
    let m = manifest(&out.join("manifest.json"));
    assert_eq!(m["command"], "validate");
    assert_eq!(m["instance"]["sha256"].as_str().unwrap().len(), 64);

    let mut bad: Value = serde_json::from_str(equilox::fixtures::TINY_JSON).unwrap();
    bad["scenarios"][0]["probability"] = 0.9.into();
    bad["distances_km"][0][1] = (-1.0).into();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, bad.to_string()).unwrap();
    let o = equilox(&["validate", arg(&path), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().count() >= 2, "{}", stdout(&o));
    assert_eq!(manifest(&out.join("manifest.json"))["exit_code"], 1);

    assert_eq!(equilox(&["validate", "nope.json", "--out", arg(&out)]).status.code(), Some(1));
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(equilox(&["validate", arg(&path), "--out", arg(&out)]).status.code(), Some(1));
}

#[test]
fn run_writes_plan_metrics_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sp");
    let o = equilox(&["run", "tiny.json", "sp", "--out", arg(&out), "--repro"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("status:      optimal"), "{text}");
    assert!(text.contains("open RFs:"), "{text}");
    for f in ["solution.json", "first_stage.json", "metrics.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let m = manifest(&out.join("manifest.json"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["params"]["threads"], 1);
    assert_eq!(m["formulations"][0], "sp");
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().next().unwrap(), "scenario,probability,U,G,coverage_north,coverage_south");
    assert_eq!(metrics.lines().count(), 3);
}

#[test]
fn ginic_with_one_cluster_per_scenario_maximizes_expected_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = equilox(&["run", "tiny.json", "--formulation", "ginic", "--clusters", "1,1", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sol: Value = serde_json::from_str(&std::fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    let objective = sol["objective"].as_f64().unwrap();
    let mut rdr = csv::Reader::from_path(out.join("metrics.csv")).unwrap();
    let expected: f64 = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            r[1].parse::<f64>().unwrap() * r[2].parse::<f64>().unwrap()
        })
        .sum();
    assert!((objective - expected).abs() < 1e-6, "{objective} vs {expected}");
    assert_eq!(manifest(&out.join("manifest.json"))["clusters"]["ks"], serde_json::json!([1, 1]));
}

#[test]
fn lp_relaxation_reports_value_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lp");
    let o = equilox(&["run", "tiny.json", "gini", "--lp-relax", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("LP relaxation:"));
    assert!(out.join("solution.json").exists());
    assert!(!out.join("first_stage.json").exists());
}

#[test]
fn solver_failure_exits_two_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = equilox(&["run", "tiny.json", "sp", "--solver-path", "/nonexistent/highs", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let m = manifest(&out.join("manifest.json"));
    assert_eq!(m["exit_code"], 2);
    assert!(m["error"].as_str().unwrap().contains("error"));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, count: &str| {
        let out = dir.path().join(name);
        let o = equilox(&[
            "simulate", "tiny.json", "--count", count, "--seed", "5", "--repro", "--no-cache", "--out", arg(&out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "4");
    let b = run("b", "4");
    let plans = |dir: &Path| {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("plans.json")).unwrap()).unwrap();
        v.as_array_mut().unwrap().iter_mut().for_each(|p| p["wall_time_s"] = Value::Null);
        v
    };
    assert_eq!(plans(&a), plans(&b));
    for f in ["scatter.csv", "summary.csv", "hist_gini.csv", "benefit_inequity.csv", "realizations.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let scatter = std::fs::read_to_string(a.join("scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 1 + 4 * 4);

    let single = run("one", "1");
    let scatter = std::fs::read_to_string(single.join("scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 1 + 4);
}

#[test]
fn simulate_caches_solves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let args = ["simulate", "tiny.json", "--count", "2", "--formulations", "sp,gini", "--out", arg(&out)];
    assert_eq!(equilox(&args).status.code(), Some(0));
    let cached = std::fs::read_dir(out.join("cache")).unwrap().count();
    // identical realizations share an entry
    assert!((3..=2 + 2 * 2).contains(&cached), "{cached}");
    assert_eq!(equilox(&args).status.code(), Some(0));
    assert_eq!(std::fs::read_dir(out.join("cache")).unwrap().count(), cached);
}

#[test]
fn export_round_trips_through_mps() {
    let dir = tempfile::tempdir().unwrap();
    let mps = dir.path().join("m/gini.mps");
    let o = equilox(&["export", "tiny.json", "gini", "--output", arg(&mps)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let parsed = equilox::models::mps::parse_mps(&std::fs::read_to_string(&mps).unwrap()).unwrap();
    let inst = equilox::fixtures::tiny();
    let demand = equilox::derive_demands(&inst);
    let opts = equilox::BuildOptions {
        valid_inequality: true,
        clusterings: None,
    };
    let built = equilox::build(equilox::Formulation::Gini, &inst, &demand, &opts).unwrap();
    assert_eq!(parsed.variables().len(), built.variables().len());
    assert_eq!(parsed.constraints().len(), built.constraints().len());
    assert!(dir.path().join("m/gini.mps.manifest.json").exists());

    let lp = dir.path().join("sp.lp");
    let o = equilox(&["export", "tiny.json", "sp", "--format", "lp", "--output", arg(&lp)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&lp).unwrap().contains("Subject To"));
}
