use std::process::{Command, Output};

use serde_json::Value;

fn lindsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindsim"))
        .args(args)
        .env_remove("LINDSIM_MAX_QUBITS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("lindsim-cli-{}-{name}", std::process::id()))
}

#[test]
fn channel_backend_depolarizing_within_eps() {
    let out = lindsim(&["evolve", "--scenario", "depolarizing", "--t", "0.6931471805599453", "--eps", "0.1"]);
    let doc = json_of(&out);
    assert_eq!(doc["backend"], "channel");
    let d = doc["distance_to_exact"].as_f64().unwrap();
    assert!(d <= 0.1, "distance {d}");
    // ρ₀₀ → 3/4 up to the approximation
    let p0 = doc["final"][0][0][0].as_f64().unwrap();
    assert!((p0 - 0.75).abs() < 0.01, "{p0}");
}

#[test]
fn exact_backend_at_zero_time_is_identity() {
    let doc = json_of(&lindsim(&["evolve", "--scenario", "xy", "--n", "2", "--t", "0", "--backend", "exact", "--init", "plus"]));
    assert_eq!(doc["distance_to_exact"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["final"], doc["initial"]);
}

#[test]
fn montecarlo_is_reproducible_for_fixed_seed() {
    let args = [
        "evolve", "--scenario", "amplitude-damping", "--hz", "0.5", "--t", "0.5", "--backend", "montecarlo", "--seed",
        "7", "--n-traj", "100", "--init", "plus",
    ];
    let a = lindsim(&args);
    let b = lindsim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = lindsim(&[&args[..10], &["8", "--n-traj", "100", "--init", "plus"]].concat());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn csv_report_has_header_and_one_row() {
    let out = lindsim(&["evolve", "--scenario", "depolarizing", "--t", "0.2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("backend,t,eps,seed,tau,r,distance_to_exact"));
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
}

#[test]
fn scenario_file_round_trips_through_evolve() {
    let path = tmp("model.json");
    let out = lindsim(&["scenario", "--scenario", "collective", "--n", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let from_file = json_of(&lindsim(&["evolve", "--model", path.to_str().unwrap(), "--t", "0.3", "--backend", "exact"]));
    let direct = json_of(&lindsim(&["evolve", "--scenario", "collective", "--n", "2", "--t", "0.3", "--backend", "exact"]));
    assert_eq!(from_file["final"], direct["final"]);
    let _ = std::fs::remove_file(path);
}

#[test]
fn cost_m_sweep_keeps_alg1_constant() {
    let out = lindsim(&["cost", "--q", "4", "--n", "2", "--sweep", "m", "--values", "1,2,4,8,16"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let total = header.iter().position(|h| *h == "count_total").unwrap();
    let alg1: Vec<u64> =
        lines.filter(|l| l.starts_with("alg1,")).map(|l| l.split(',').nth(total).unwrap().parse().unwrap()).collect();
    assert_eq!(alg1.len(), 5);
    assert!(alg1.windows(2).all(|w| w[0] == w[1]), "{alg1:?}");
}

#[test]
fn verify_cost_and_cutoff_suites_pass() {
    for suite in ["costs", "cutoff"] {
        let out = lindsim(&["verify", "--suite", suite]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        assert!(String::from_utf8_lossy(&out.stdout).contains(", 0 failed"));
    }
}

#[test]
fn exit_codes_by_error_class() {
    // unknown suite and missing model are usage errors
    assert_eq!(lindsim(&["verify", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(lindsim(&["evolve", "--t", "1"]).status.code(), Some(2));
    assert_eq!(lindsim(&["evolve", "--scenario", "amplitude-damping", "--n", "2", "--t", "1"]).status.code(), Some(6));

    let bad = tmp("bad.json");
    std::fs::write(&bad, "{bad").unwrap();
    let out = lindsim(&["evolve", "--model", bad.to_str().unwrap(), "--t", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
    let _ = std::fs::remove_file(bad);

    let out = Command::new(env!("CARGO_BIN_EXE_lindsim"))
        .args(["evolve", "--scenario", "amplitude-damping", "--t", "0.3", "--backend", "circuit-alg1", "--dense"])
        .env("LINDSIM_MAX_QUBITS", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("qubits"));

    let out = lindsim(&["scenario", "--scenario", "depolarizing", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(out.status.code(), Some(7));
}
