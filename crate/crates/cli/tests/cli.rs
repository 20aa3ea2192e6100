use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_arnold-lab"));
    c.env_remove("ARNOLD_LAB_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_run_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.json");
    let cfg = r#"{
        "alpha": 1.0, "T": 0.5, "dt": "auto", "stride": 5,
        "init": {"bumps": [{"k": 2}, {"k": 0, "width": 0.8}], "random_seed": 4, "x_norm": 1e-3},
        "grid": {"N": 128, "r_max": 12, "K_max": 4}
    }"#;
    std::fs::write(&path, cfg).unwrap();
    path
}

#[test]
fn hardy_gaussian_summary() {
    let out = run(&["hardy", "--profile", "gaussian"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    let c = s["result"]["derived"]["C_H"].as_f64().unwrap();
    assert!((c - 0.57).abs() < 0.01, "{c}");
    assert_eq!(s["command"], "hardy");
    assert!(s["meta"]["created_unix"].is_u64());
}

#[test]
fn verify_appendix_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--suite", "appendix", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let s = summary(&out);
    assert_eq!(s["result"]["passed"], true);
    assert_eq!(s["result"]["checks"][0]["slug"], "appendix");
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("PASS  6"));
    assert!(dir.path().join("verify.json").exists());
}

#[test]
fn evolve_writes_reproducible_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_run_config(dir.path());
    let csv_after = |threads: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = bin()
            .env("ARNOLD_LAB_THREADS", threads)
            .args(["evolve", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let mu = summary(&out)["result"]["fitted_mu"].as_f64().unwrap();
        assert!(mu > 0.0, "{mu}");
        std::fs::read(out_dir.join("trajectory.csv")).unwrap()
    };
    let a = csv_after("1", "a");
    let b = csv_after("1", "b");
    let c = csv_after("3", "c");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,J,Q,N,xnorm,mass,M1,M2,residual"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 9);
    assert!(first.iter().all(|c| c.contains('e') && c.split('e').next().unwrap().trim_start_matches('-').len() == 13));
}

#[test]
fn evolve_flags_override_the_run_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_run_config(dir.path());
    let out = run(&["evolve", "--config", cfg.to_str().unwrap(), "--N", "96", "--kmax", "3", "--seed", "9"]);
    assert_eq!(code(&out), 0);
    let c = &summary(&out)["result"]["config"];
    assert_eq!(c["grid"]["N"], 96);
    assert_eq!(c["grid"]["K_max"], 3);
    assert_eq!(c["init"]["random_seed"], 9);
}

#[test]
fn forms_are_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let field = |sub: &str, seed: &str| {
        let d = dir.path().join(sub);
        let out = run(&["forms", "--seed", seed, "--N", "257", "--rmax", "12", "--kmax", "4", "--out", d.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let s = summary(&out);
        let f = &s["result"]["forms"];
        assert!(f["Q"].as_f64().unwrap() >= s["result"]["delta_estimate"]["delta"].as_f64().unwrap() * f["x_norm_sq"].as_f64().unwrap());
        std::fs::read(d.join("field.csv")).unwrap()
    };
    assert_eq!(field("a", "5"), field("b", "5"));
    assert_ne!(field("c", "5"), field("d", "6"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"profile": {"kind": "algebraic", "kappa": 3}, "grid": {"N": 1024, "r_max": 1000, "mapping": "log_r"}}"#)
        .unwrap();
    let ch = |extra: &[&str]| {
        let mut args = vec!["hardy", "--config", path.to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let s = summary(&out);
        assert_eq!(s["result"]["resolution"]["N"], 1024);
        s["result"]["derived"]["C_H"].as_f64().unwrap()
    };
    assert!(ch(&[]) < 1.0);
    assert!(ch(&["--kappa", "1.5"]) > 1.0);
}

#[test]
fn profile_table_and_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["profile", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("r,omega,psi_prime,A,V,B,W\n"));
    let out = run(&["energy", "--profile", "algebraic", "--kappa", "2"]);
    assert_eq!(code(&out), 0);
    let r = &summary(&out)["result"];
    assert!(r["max_relative_disagreement"].as_f64().unwrap() < 1e-6);
    assert!(r["log_hls_gap"].as_f64().unwrap().abs() < 1e-4 * std::f64::consts::PI.powi(2));
}

#[test]
fn maximizer_recovers_the_algebraic_profile() {
    let out = run(&["maximize", "--profile", "algebraic", "--kappa", "2"]);
    assert_eq!(code(&out), 0);
    let r = &summary(&out)["result"];
    assert!(r["l1_distance_to_profile_over_mass"].as_f64().unwrap() < 1e-3);
    assert_eq!(r["maximizer"]["converged"], true);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&run(&["hardy", "--bogus"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["verify", "--suite", "nope"])), 1);
    assert_eq!(code(&run(&["spectrum", "--operator", "nope"])), 1);
    assert_eq!(code(&run(&["evolve"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(code(&run(&["hardy", "--N", "4"])), 2);
    assert_eq!(code(&run(&["hardy", "--profile", "algebraic", "--kappa", "0.5"])), 2);
    assert_eq!(code(&run(&["maximize", "--profile", "algebraic", "--kappa", "3", "--mass", "0.5"])), 2);
    assert_eq!(code(&run(&["spectrum", "--operator", "lk", "--profile", "algebraic", "--kappa", "3"])), 2);
    assert_eq!(code(&run(&["hardy", "--config", "/nonexistent/cfg.json"])), 2);
    let out = bin().env("ARNOLD_LAB_THREADS", "zero").arg("hardy").output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn unresolved_spectrum_exits_3() {
    let out = run(&["hardy", "--N", "16"]);
    assert_eq!(code(&out), 3);
    assert_eq!(summary(&out)["result"]["converged"], false);
}
