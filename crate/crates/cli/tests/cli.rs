use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn comma_ea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_comma-ea"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = comma_ea(&[
        "run",
        "--objective",
        "jump:k=2",
        "--n",
        "12",
        "--mu",
        "2",
        "--lambda",
        "10",
        "--trials",
        "15",
        "--seed",
        "3",
        "--out-dir",
        path(dir.path()),
    ]);
    let v = json(&out);
    let row = &v["summary"][0];
    assert_eq!(row["trials"], 15);
    assert_eq!(row["successes"], 15);
    for name in ["runs.csv", "summary.json", "summary.csv", "compare.json", "spec.json"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let csv = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    assert!(csv.starts_with(
        "experiment_id,grid_index,trial,n,k,mu,lambda,selection,mutation_rate,seed,evaluations,iterations,censored,best_fitness\n"
    ));
    assert_eq!(csv.lines().count(), 16);

    // Same seed, same bytes.
    let again = tempfile::tempdir().unwrap();
    json(&comma_ea(&[
        "run",
        "--objective",
        "jump:k=2",
        "--n",
        "12",
        "--mu",
        "2",
        "--lambda",
        "10",
        "--trials",
        "15",
        "--seed",
        "3",
        "--out-dir",
        path(again.path()),
        "--threads",
        "2",
    ]));
    assert_eq!(csv, std::fs::read_to_string(again.path().join("runs.csv")).unwrap());
}

#[test]
fn run_rejects_grids() {
    let out = comma_ea(&[
        "run",
        "--objective",
        "onemax",
        "--n",
        "10,12",
        "--lambda",
        "4",
        "--trials",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_from_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("spec.json");
    std::fs::write(
        &config,
        r#"{"experiment_id":"grid","objective":"jump","n":[10,12],"k":[2],"lambda":[8,16],"mu_fraction":0.25,"trials":5,"master_seed":1}"#,
    )
    .unwrap();
    let v = json(&comma_ea(&[
        "sweep",
        "--config",
        path(&config),
        "--selection",
        "comma,plus",
        "--trials",
        "4",
    ]));
    let rows = v["summary"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r["trials"] == 4));
    assert_eq!(v["compare"]["comparisons"].as_array().unwrap().len(), 8);
}

#[test]
fn theory_reports() {
    let v = json(&comma_ea(&[
        "theory", "--n", "50", "--k", "2", "--mu", "5", "--lambda", "60",
    ]));
    let inv: f64 = 1.0 / v["p_k"]["value"].as_f64().unwrap();
    assert!((inv - 6593.08).abs() < 0.01, "{inv}");
    for key in [
        "plus_lower",
        "plus_upper",
        "comma_lower",
        "comma_upper",
        "level_t0",
        "z_schedule",
        "uniform",
        "derived",
        "order_only",
    ] {
        assert!(v.get(key).is_some(), "{key} missing");
    }
    assert!(v["comma_lower"]["precondition_details"].as_array().unwrap().len() >= 7);

    let v = json(&comma_ea(&["theory", "--formula", "pk", "--n", "20", "--k", "2"]));
    assert_eq!(v.as_object().unwrap().len(), 1);
    let inv: f64 = 1.0 / v["p_k"]["value"].as_f64().unwrap();
    assert!((inv - 1007.013).abs() < 1e-3, "{inv}");
}

#[test]
fn theory_rejects_bad_domain() {
    let out = comma_ea(&["theory", "--formula", "pk", "--n", "5", "--k", "9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_are_not_violations() {
    assert_eq!(
        comma_ea(&["theory", "--formula", "nope", "--n", "5"]).status.code(),
        Some(1)
    );
    assert_eq!(comma_ea(&["--help"]).status.code(), Some(0));
}

#[test]
fn oracle_matches_known_value() {
    let v = json(&comma_ea(&["oracle", "--objective", "onemax", "--n", "1,2"]));
    let first = v[0]["result"]["expected"].as_f64().unwrap();
    assert!((first - 1.5).abs() < 1e-12, "{first}");
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn drift_probe_checks() {
    let out = comma_ea(&[
        "drift",
        "--n",
        "50",
        "--k",
        "4",
        "--mu",
        "40",
        "--lambda",
        "80",
        "--level",
        "0,1",
        "--samples",
        "300",
        "--check",
    ]);
    let v = json(&out);
    assert_eq!(v["levels"].as_array().unwrap().len(), 2);
    assert_eq!(v["params"]["k_star"], 3);
}

fn write_runs(path: &Path, evaluations: &[u64]) {
    let mut text = String::from(
        "experiment_id,grid_index,trial,n,k,mu,lambda,selection,mutation_rate,seed,evaluations,iterations,censored,best_fitness\n",
    );
    for (t, e) in evaluations.iter().enumerate() {
        let it = (e - 10).div_ceil(40);
        text.push_str(&format!("x,0,{t},50,2,10,40,comma,0.02,{t},{e},{it},false,52\n"));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn compare_flags_violations_with_check() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.csv");
    // Far below the comma lower bound for n=50, k=2, mu=10, lambda=40.
    write_runs(&runs, &[50, 60, 70, 55, 65]);
    let out = comma_ea(&["compare", "--runs", path(&runs)]);
    let v = json(&out);
    assert_eq!(v["compare"]["violations"], 1);
    assert_eq!(v["violations"][0]["check"], "comma_lower");

    let out = comma_ea(&[
        "compare",
        "--runs",
        path(&runs),
        "--check",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("compare.json").exists());

    write_runs(&runs, &[5000, 7000, 9000, 6000, 8000]);
    let out = comma_ea(&["compare", "--runs", path(&runs), "--check"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn compare_rejects_foreign_csv() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.csv");
    std::fs::write(&runs, "a,b\n1,2\n").unwrap();
    assert_eq!(comma_ea(&["compare", "--runs", path(&runs)]).status.code(), Some(1));
}
