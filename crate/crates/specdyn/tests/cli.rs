use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn specdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specdyn")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn error_record(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).expect("json error record");
    serde_json::from_str(line).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn two_level_spectrum() {
    let out = specdyn(&["spectrum", "--n", "2", "--omega1", "1", "--omega0", "2", "--g-re", "1", "--kappa", "0", "--s", "1"]);
    let v = json_stdout(&out);
    let e: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let r2 = 2f64.sqrt();
    assert!((e[0] - (2.0 - r2)).abs() <= 1e-12 && (e[1] - (2.0 + r2)).abs() <= 1e-12);
    assert_eq!(v["sector"]["l0"], serde_json::json!([-1, 3]));
}

#[test]
fn tmsv_file_classifies_p0_scalar() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("tmsv.json");
    let made = specdyn(&["polarization", "tmsv", "--beta-re", "0.5", "--n-max", "32", "--output", path(&state)]);
    assert!(made.status.success());
    let v = json_stdout(&specdyn(&["polarization", "classify", "--state", path(&state), "--order", "6", "--seed", "7"]));
    assert_eq!(v["verdict"], "P0-scalar");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["degree_normalization"], "<N>/2");
    assert!(v["moments"]["P0"].as_array().unwrap().iter().all(|x| x.as_f64() == Some(0.0)));
}

#[test]
fn singlet_file_classifies_p_scalar() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("singlet.json");
    assert!(specdyn(&["polarization", "singlet", "--k", "2", "--m", "2", "--output", path(&state)]).status.success());
    let v = json_stdout(&specdyn(&["polarization", "classify", "--state", path(&state), "--samples", "8"]));
    assert_eq!(v["verdict"], "P-scalar");
}

#[test]
fn density_matrix_input() {
    // equal mixture of |1,0> and |0,1>: no net polarization, only P0^2 survives
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("rho.json");
    let mut rho = vec![vec![[0.0, 0.0]; 3]; 3];
    rho[1][1] = [0.5, 0.0];
    rho[2][2] = [0.5, 0.0];
    let file = serde_json::json!({"mode_count": 2, "n_max": 1, "rho": rho});
    std::fs::write(&state, file.to_string()).unwrap();
    let v = json_stdout(&specdyn(&["polarization", "classify", "--state", path(&state), "--order", "2"]));
    assert_eq!(v["tol"], 1e-6);
    assert_ne!(v["verdict"], "polarized");
    assert!(v["polarization_degree"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn usage_errors_exit_two_with_record() {
    let out = specdyn(&["spectrum", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["exit_code"], 2);

    let out = specdyn(&["spectrum", "--n", "1", "--kappa", "0", "--s", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = specdyn(&["polarization", "classify", "--state", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["kind"], "usage");

    let out = specdyn(&["polarization", "tmsv", "--beta-re", "0.5", "--n-max", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["kind"], "leakage");
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"n": 2, "omega1": 1, "omega0": 2, "g_re": 1, "kappa": 0, "s": 1}"#).unwrap();
    let a = json_stdout(&specdyn(&["spectrum", "--config", path(&cfg)]));
    let b = json_stdout(&specdyn(&["spectrum", "--n", "2", "--omega1", "1", "--omega0", "2", "--g-re", "1", "--kappa", "0", "--s", "1"]));
    assert_eq!(a, b);
    // flag wins
    let c = json_stdout(&specdyn(&["spectrum", "--config", path(&cfg), "--g-re", "0"]));
    assert_eq!(c["eigenvalues"], serde_json::json!([2.0, 2.0]));

    std::fs::write(&cfg, r#"{"n": 2, "gamma": 1}"#).unwrap();
    let out = specdyn(&["spectrum", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_outputs() {
    let out = specdyn(&["spectrum", "--n", "2", "--n-max", "4", "--g-re", "0.3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kappa,s,level_index,energy"));
    assert!(lines.count() > 0);

    let out = specdyn(&["flow", "--n", "2", "--kappa", "0", "--s", "8", "--g-re", "0.5", "--t-end", "1", "--record-every", "100"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,q,p,energy\n"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn variational_and_evolution_reports() {
    let v = json_stdout(&specdyn(&["variational", "--n", "2", "--kappa", "0", "--s", "1", "--g-re", "0.7"]));
    let best = v["best"]["energy"].as_f64().unwrap();
    let ground = v["exact_energies"][0].as_f64().unwrap();
    assert!((best - ground).abs() <= 1e-6);

    let v = json_stdout(&specdyn(&["evolve", "--n", "2", "--kappa", "1", "--s", "3", "--g-re", "0.4", "--t-end", "5", "--points", "11"]));
    assert!(v["population_drift"].as_f64().unwrap() <= 1e-10);
    for x in v["norm"].as_array().unwrap() {
        assert!((x.as_f64().unwrap() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn sector_algebra_dump() {
    let v = json_stdout(&specdyn(&["sectors", "--n", "2", "--kappa", "1", "--s", "2"]));
    assert_eq!(v["Y0"].as_array().unwrap().len(), 3);
    // Y+ lowest entry: sqrt(n0 (n1+1)(n1+2)) with n0 = 2, n1 = 1
    let y = v["Yplus"][1][0][0].as_f64().unwrap();
    assert!((y - 12f64.sqrt()).abs() <= 1e-12);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["verify", "--suite", "polarization", "--seed", "3", "--format", "json"];
    let a = specdyn(&args);
    let b = specdyn(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_restricted_sweep_passes() {
    let out = specdyn(&["verify", "--suite", "algebra", "--s-max", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.lines().last().unwrap().ends_with("failed 0"));
}
