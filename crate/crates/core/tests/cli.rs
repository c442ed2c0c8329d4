use std::path::Path;
use std::process::Command;

use fanout_core::lattice::{LatticeLayout, QubitAssignment};
use fanout_core::protocols::plan_fanout;
use fanout_core::schedule::{parse_schedule, validate_powerlaw};
use serde_json::Value;

fn fanout(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_fanout"))
        .args(args)
        .output()
        .expect("binary runs");
    out.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn small_fanout_passes_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(fanout(&["fanout", "--n", "3", "--alpha", "1", "--dimension", "1", "--out", &out]), 0);
    let v = json(&dir.path().join("verification.json"));
    for key in ["fanout_fidelity", "ancilla_return_fidelity"] {
        assert!(v[key].as_f64().unwrap() >= 1.0 - 1e-10, "{key}");
    }
    assert!(v["makespan_gross"].as_f64().unwrap() > v["makespan_net"].as_f64().unwrap());
    let rounds = json(&dir.path().join("rounds.json"));
    assert_eq!(rounds["rounds"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("state.txt").exists());
}

#[test]
fn single_qubit_fanout_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fanout(&["fanout", "--n", "1", "--out", &out_arg(dir.path())]), 2);
}

#[test]
fn simulation_cap_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fanout(&["fanout", "--n", "7", "--out", &out_arg(dir.path())]), 2);
}

#[test]
fn schedule_only_handles_large_registers() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(fanout(&["fanout", "--schedule-only", "--n", "65536", "--alpha", "1", "--out", &out]), 0);
    let v = json(&dir.path().join("verification.json"));
    assert!(v["makespan_net"].as_f64().unwrap() > 0.0);
    assert!(v["fanout_fidelity"].is_null());
    assert!(!dir.path().join("state.txt").exists());
}

#[test]
fn written_schedule_reloads_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(fanout(&["fanout", "--n", "5", "--alpha", "1.5", "--dimension", "2", "--out", &out]), 0);
    let text = std::fs::read_to_string(dir.path().join("schedule.txt")).unwrap();
    let reloaded = parse_schedule(&text).unwrap();

    let layout = LatticeLayout::for_fanout(2, 5).unwrap();
    let plan = plan_fanout(&QubitAssignment::fanout(&layout, 5).unwrap(), 1.5).unwrap();
    assert_eq!(reloaded, plan.schedule().unwrap());
    assert!(validate_powerlaw(&reloaded, &layout, 1.5).unwrap().passed());
}

#[test]
fn lemma_command_passes_and_enforces_its_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(fanout(&["verify-lemma", "--n", "4", "--band", "1,2,3,4", "--out", &out]), 0);
    let v = json(&dir.path().join("spreading.json"));
    assert_eq!(v["aqft"].as_array().unwrap().len(), 4);
    assert!((v["lemma"]["weight"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["pass"], Value::Bool(true));

    assert_eq!(fanout(&["verify-lemma", "--n", "9", "--out", &out]), 2);
    assert_eq!(fanout(&["verify-lemma", "--n", "4", "--band", "5", "--out", &out]), 2);
}

#[test]
fn scaling_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    for (alpha, regime) in [("1", "logarithmic"), ("0.5", "constant"), ("1.5", "power 1/2")] {
        assert_eq!(fanout(&["scaling", "--alpha", alpha, "--dimension", "1", "--out", &out]), 0, "{alpha}");
        let v = json(&dir.path().join("verdict.json"));
        assert_eq!(v["expected"], regime);
        assert_eq!(v["pass"], Value::Bool(true));
    }
    let csv = std::fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "alpha,D,n,makespan_net,makespan_gross,regime,fit_exponent,residual");
    assert_eq!(csv.lines().count(), 14);
}

#[test]
fn scaling_reports_a_mismatch_with_exit_one() {
    // Three-dimensional lattices up to 2^16 sites are too small for the
    // logarithmic fit to settle within tolerance.
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(fanout(&["scaling", "--alpha", "3", "--dimension", "3", "--out", &out]), 1);
    assert_eq!(json(&dir.path().join("verdict.json"))["pass"], Value::Bool(false));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = out_arg(dir.path());
        assert_eq!(fanout(&["fanout", "--n", "4", "--alpha", "2", "--seed", "9", "--out", &out]), 0);
        assert_eq!(
            fanout(&["scaling", "--alpha", "1", "--samples", "16,32,64,128,256", "--out", &out]),
            0
        );
        assert_eq!(fanout(&["correlation", "--n", "6", "--input", "random", "--seed", "3", "--out", &out]), 0);
    }
    for name in [
        "schedule.txt",
        "rounds.json",
        "verification.json",
        "state.txt",
        "scaling.csv",
        "verdict.json",
        "correlation.csv",
        "correlation.json",
    ] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn config_file_is_merged_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 4\n[lattice]\ndimension = 1\n[protocol]\nalpha = 2.0\nn = 6\n[analysis]\nschedule_only = true\n",
    )
    .unwrap();
    let out = out_arg(&dir.path().join("results"));
    assert_eq!(fanout(&["fanout", "--config", cfg.to_str().unwrap(), "--n", "40", "--out", &out]), 0);
    let v = json(&dir.path().join("results/verification.json"));
    assert!(v["fanout_fidelity"].is_null());
    let schedule = std::fs::read_to_string(dir.path().join("results/schedule.txt")).unwrap();
    assert!(schedule.starts_with("# protocol=fanout alpha=2.0000000000000000e0 layout=1d:80"));

    std::fs::write(&cfg, "[protocol]\nalfa = 2.0\n").unwrap();
    assert_eq!(fanout(&["fanout", "--config", cfg.to_str().unwrap(), "--out", &out]), 2);
    assert_eq!(fanout(&["fanout", "--config", "/nonexistent/run.toml", "--out", &out]), 2);
}

#[test]
fn correlation_profile_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(fanout(&["correlation", "--n", "8", "--placement", "interleaved", "--input", "plus", "--out", &out]), 0);
    let csv = std::fs::read_to_string(dir.path().join("correlation.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "distance,correlation");
    assert_eq!(csv.lines().count(), 8);
    assert_eq!(fanout(&["correlation", "--n", "8", "--input", "sideways", "--out", &out]), 2);
}
