use std::path::{Path, PathBuf};
use std::process::Command as Process;

use delaystab::cli::{run, Command, Options};
use serde_json::Value;

fn example(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "examples", name].iter().collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("delaystab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_config(name: &str, text: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn certify_worked_example() {
    let out = run(Command::Certify, Some(&example("paper_example.json")), &Options::default());
    assert_eq!(out.exit_code, 0, "{:#}", out.report);
    let r = &out.report;
    assert_eq!(r["verdict"], "certified_stable");
    assert!((r["spectral_radius"].as_f64().unwrap() - 0.8442890115749591).abs() < 1e-9);
    assert_eq!(r["minors"].as_array().unwrap().len(), 5);
    assert_eq!(r["config_sha256"].as_str().unwrap().len(), 64);
    for key in ["matrix", "hypotheses", "norms", "metadata", "first_order"] {
        assert!(!r[key].is_null(), "{key}");
    }
}

#[test]
fn payload_is_deterministic() {
    let a = run(Command::Certify, Some(&example("paper_example.json")), &Options::default());
    let b = run(Command::Certify, Some(&example("paper_example.json")), &Options::default());
    assert_eq!(serde_json::to_string(&a.payload()).unwrap(), serde_json::to_string(&b.payload()).unwrap());
}

#[test]
fn inflated_delay_is_not_certified() {
    let out = run(Command::Certify, Some(&example("tau1_inflated.json")), &Options::default());
    assert_eq!(out.exit_code, 1);
    assert_eq!(out.report["verdict"], "not_certified");
}

#[test]
fn corollary_route() {
    let out = run(Command::CertifyCorollary, Some(&example("undelayed_damping.json")), &Options::default());
    assert_eq!(out.exit_code, 0, "{:#}", out.report);
    assert_eq!(out.report["cross_check"]["verdict"], "certified_stable");

    let err = run(Command::CertifyCorollary, Some(&example("paper_example.json")), &Options::default());
    assert_eq!(err.exit_code, 2);
    assert_eq!(err.report["error"]["module"], "stability");
}

#[test]
fn validate_reports_pass() {
    let out = run(Command::Validate, Some(&example("paper_example.json")), &Options::default());
    assert_eq!(out.exit_code, 0);
    assert_eq!(out.report["verdict"], "pass");
}

#[test]
fn config_errors_exit_two_with_pointer() {
    let text = std::fs::read_to_string(example("paper_example.json")).unwrap();
    let bad = write_config("bad_expr.json", &text.replace("0.1*sin(t)^2", "0.1*sin(t"));
    let out = run(Command::Certify, Some(&bad), &Options::default());
    assert_eq!(out.exit_code, 2);
    assert_eq!(out.report["error"]["module"], "config");
    assert!(out.report["error"]["message"].as_str().unwrap().contains("/system/g1/lag"));

    let missing = run(Command::Certify, Some(Path::new("/nonexistent/x.json")), &Options::default());
    assert_eq!(missing.exit_code, 2);
    assert_eq!(run(Command::Certify, None, &Options::default()).exit_code, 2);
}

#[test]
fn simulate_writes_csv() {
    let csv = scratch("traj.csv");
    let opts = Options { t_end: Some(2.0), step: Some(0.01), out: Some(csv.clone()), ..Options::default() };
    let out = run(Command::Simulate, Some(&example("paper_example.json")), &opts);
    assert_eq!(out.exit_code, 0, "{:#}", out.report);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,dx,ddx,u,du"));
    assert_eq!(lines.count(), 201);
}

#[test]
fn decay_and_apriori() {
    let opts = Options { t_end: Some(200.0), ..Options::default() };
    let out = run(Command::Decay, Some(&example("paper_example.json")), &opts);
    assert_eq!(out.exit_code, 0, "{:#}", out.report);
    assert!(out.report["decay"]["mu"].as_f64().unwrap() > 0.0);

    let out = run(Command::Apriori, Some(&example("paper_example_forced.json")), &Options::default());
    assert_eq!(out.exit_code, 0, "{:#}", out.report);
    assert_eq!(out.report["apriori"]["all_hold"], Value::Bool(true));
}

#[test]
fn reproduce_example_table() {
    let out = run(Command::ReproduceExample, None, &Options::default());
    assert_eq!(out.exit_code, 0, "{:#}", out.report);
    let text = out.text.unwrap();
    assert!(text.contains("0.844289"), "{text}");
    assert!(text.contains("alpha1^2 >= 4 A2"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_delaystab");
    let status = |args: &[&str]| Process::new(bin).args(args).output().unwrap().status.code();
    let ok = example("paper_example.json");
    let inflated = example("tau1_inflated.json");
    assert_eq!(status(&["certify", ok.to_str().unwrap()]), Some(0));
    assert_eq!(status(&["certify", inflated.to_str().unwrap()]), Some(1));
    assert_eq!(status(&["certify", "/nonexistent.json"]), Some(2));
    assert_eq!(status(&["certify", ok.to_str().unwrap(), "--mode", "sampled"]), Some(0));
    let first_order = Process::new(bin)
        .args(["certify", ok.to_str().unwrap(), "--three-halves"])
        .output()
        .unwrap();
    let report: Value = serde_json::from_slice(&first_order.stdout).unwrap();
    assert_eq!(report["first_order"]["threshold"], 1.5);
}

#[test]
fn validate_locates_bound_violation() {
    let text = std::fs::read_to_string(example("paper_example.json")).unwrap();
    let dipping = write_config(
        "a2_dip.json",
        &text.replace("\"0.2+0.05*abs(cos(t))\", \"lower\": 0.2", "\"0.2+0.05*abs(cos(t))\", \"lower\": 0.21"),
    );
    let out = run(Command::Validate, Some(&dipping), &Options::default());
    assert_eq!(out.exit_code, 1);
    let checks = out.report["hypotheses"]["checks"].as_array().unwrap();
    let a2 = checks.iter().find(|c| c["name"] == "bounds:a2").unwrap();
    let t = a2["first_violation"]["t"].as_f64().unwrap();
    // 0.2 + 0.05|cos t| < 0.21 first when |cos t| < 0.2.
    assert!((t - 0.2f64.acos()).abs() < 2e-3, "{t}");
}
