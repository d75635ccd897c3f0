use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erasure-hc"))
        .args(args)
        .env("QECHC_THREADS", "2")
        .output()
        .expect("binary runs")
}

#[test]
fn no_arguments_prints_usage() {
    let out = run(&[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn default_suite_passes_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("reports.csv");
    let out = run(&[
        "verify",
        "--suite",
        "default",
        "--seed",
        "7",
        "--n",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("id,label,sample,params,lhs,rhs,gap,tol,pass"));
    assert!(lines.clone().count() > 100);
    assert!(lines.all(|l| l.ends_with(",true")));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("reports.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 7);
    assert_eq!(summary["failed"], 0);
}

#[test]
fn reruns_are_byte_identical() {
    let a = run(&[
        "verify",
        "--suite",
        "default",
        "--seed",
        "11",
        "--n",
        "2",
        "--samples",
        "5",
    ]);
    let b = run(&[
        "verify",
        "--suite",
        "default",
        "--seed",
        "11",
        "--n",
        "2",
        "--samples",
        "5",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "verify",
        "--suite",
        "default",
        "--seed",
        "12",
        "--n",
        "2",
        "--samples",
        "5",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "verify",
        "--suite",
        "default",
        "--seed",
        "3",
        "--n",
        "2",
        "--samples",
        "4",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_erasure-hc"))
        .args(args)
        .env("QECHC_THREADS", "1")
        .output()
        .unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_erasure-hc"))
        .args(args)
        .env("QECHC_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn unknown_check_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"checks": ["no_such_check"]}"#).unwrap();
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_check"));
}

#[test]
fn tolerance_overrides() {
    let ok = run(&[
        "verify",
        "--checks",
        "hc",
        "--samples",
        "3",
        "--n",
        "2",
        "--tol-override",
        "hc=1e-6",
    ]);
    assert!(ok.status.success());
    let plain = run(&["verify", "--checks", "hc", "--samples", "3", "--n", "2"]);
    // only the tol column moves
    assert_ne!(ok.stdout, plain.stdout);
    let bad = run(&["verify", "--checks", "hc", "--tol-override", "hc=-1"]);
    assert_eq!(bad.status.code(), Some(2));
    let malformed = run(&["verify", "--tol-override", "hc"]);
    assert_eq!(malformed.status.code(), Some(2));
}

#[test]
fn crg_bound_table() {
    let out = run(&[
        "crg-bound",
        "--eps",
        "0.5",
        "--gamma-grid",
        "0.01:0.3:0.01",
        "--k",
        "1000",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,gamma,k,c,lower_bound,delta_star,classical_upper");
    assert_eq!(lines.len(), 31);
    let cols: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    // the lower bound never exceeds the classical protocol cost
    assert!(cols[4] > 0.0 && cols[4] <= cols[6]);
    let last: Vec<f64> = lines[30].split(',').map(|v| v.parse().unwrap()).collect();
    assert!(last[4] <= cols[4]);
}

#[test]
fn guess_zero_simulation() {
    let out = run(&["crg-sim", "--n", "1", "--eps", "0,0.5,1", "--format", "structured"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for (row, want) in rows.as_array().unwrap().iter().zip([1.0, 0.75, 0.5]) {
        assert!((row["success"].as_f64().unwrap() - want).abs() < 1e-12);
        assert!((row["success_dense"].as_f64().unwrap() - want).abs() < 1e-12);
        assert!(row["holder_bound"].as_f64().unwrap() >= want - 1e-12);
    }
}

#[test]
fn norm_agrees_with_dense_oracle() {
    let out = run(&[
        "norm",
        "--random",
        "psd",
        "--n",
        "2",
        "--seed",
        "4",
        "--eps",
        "0.3",
        "--q",
        "1.7",
        "--format",
        "structured",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let a = v["eps_q_norm"].as_f64().unwrap();
    let b = v["dense_oracle"].as_f64().unwrap();
    assert!((a - b).abs() <= 1e-9 * a.max(1.0));
}

#[test]
fn norm_without_input_is_an_error() {
    let out = run(&["norm", "--eps", "0.3", "--q", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn entropy_sweep_rows() {
    let out = run(&[
        "entropy-sweep",
        "--n",
        "2",
        "--samples",
        "2",
        "--eps",
        "0.5",
        "--q",
        "1.5,2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // 2 samples x 3 prefix sizes x 2 exponents
    assert_eq!(text.lines().count(), 1 + 12);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn search_ratio_is_certified() {
    let out = run(&[
        "search-ratio",
        "--n",
        "2",
        "--p",
        "1.5",
        "--q",
        "2",
        "--eps",
        "0.5",
        "--restarts",
        "3",
        "--iterations",
        "100",
        "--format",
        "structured",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["certified"], true);
    assert!(v["objective"].as_f64().unwrap() <= 1.0 + 1e-9);
}
