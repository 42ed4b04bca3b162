use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rlimit::formats::{load_field, read_json, save_field, QuadratureFile, QuadratureNdFile, Sidecar};
use rlimit_core::numkit::{PointSet, SampledField};
use rlimit_core::Complex64;

fn rlimit(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlimit")).arg("--out").arg(out).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn field_1d(points: &[f64], values: &[f64]) -> SampledField {
    let v = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    SampledField::new(PointSet::new(1, points.to_vec()).unwrap(), v, "f").unwrap()
}

#[test]
fn quad_gauss_legendre_preset_has_tiny_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let o = rlimit(dir.path(), &["quad", "--preset", "gauss-legendre", "--M", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f: QuadratureFile = read_json(&dir.path().join("quad.json")).unwrap();
    assert_eq!(f.weights.len(), 8);
    assert_eq!(f.provenance.residuals.len(), 16);
    assert!(f.provenance.residuals.iter().all(|r| r.abs() <= 1e-13));
    let nodes = load_field(&dir.path().join("nodes.csv")).unwrap();
    assert_eq!(nodes.len(), 8);
    assert!(String::from_utf8_lossy(&o.stdout).contains("8 nodes"));
}

#[test]
fn quad_region_writes_kernel_rule() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        rlimit(dir.path(), &["quad", "--region", "cone", "--omega0", "1", "--pmax", "1", "--m-outer", "2", "--m-inner", "2", "--m3", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f: QuadratureNdFile = read_json(&dir.path().join("quad.json")).unwrap();
    assert_eq!(f.dim, 3);
    assert!(f.error_profile.is_some());
    let q = f.to_quadrature(Path::new("quad.json")).unwrap();
    // cone volume 2·(π ω0³ p²)/3 for the two nappes
    assert!((q.weight_sum() - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-10);
}

#[test]
fn outputs_are_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(code(&rlimit(d.path(), &["approx-sinc", "--grid", "101"])), 0);
        assert_eq!(code(&rlimit(d.path(), &["kernel-eval", "--grid", "11", "--surrogate", "--m-outer", "2", "--m-inner", "2"])), 0);
    }
    for name in ["approx_sinc.csv", "approx_sinc.json", "kernel.csv", "kernel_surrogate.csv", "kernel.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn approx_sinc_defaults_reach_level_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&rlimit(dir.path(), &["approx-sinc", "--grid", "201"])), 0);
    let side: serde_json::Value = read_json(&dir.path().join("approx_sinc.json")).unwrap();
    assert_eq!(side["level"], 3);
    assert_eq!(side["b0"], 20.0);
    assert!(side["max_error"].as_f64().unwrap() < 1e-12);
    let text = fs::read_to_string(dir.path().join("approx_sinc.csv")).unwrap();
    assert!(text.starts_with("x,approx,exact,error\n"));
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn pswf_writes_basis_and_eigenfunctions() {
    let dir = tempfile::tempdir().unwrap();
    let o = rlimit(dir.path(), &["pswf", "--band", "2", "--system", "exp", "--count", "2", "--grid", "21"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let basis: serde_json::Value = read_json(&dir.path().join("eigenbasis.json")).unwrap();
    assert_eq!(basis["kind"], "exp");
    let mu = basis["eigenvalues_mu"].as_array().unwrap();
    assert!((mu[0].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(load_field(&dir.path().join("phi_1.csv")).unwrap().len(), 21);
    assert!(!dir.path().join("phi_2.csv").exists());
}

#[test]
fn zero_field_projects_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&rlimit(dir.path(), &["quad", "--preset", "gauss-legendre", "--M", "10"])), 0);
    let xs: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
    let input = dir.path().join("zero.csv");
    save_field(&input, &field_1d(&xs, &vec![0.0; xs.len()])).unwrap();
    let o =
        rlimit(dir.path(), &["project", "--input", input.to_str().unwrap(), "--kernel", dir.path().join("quad.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = load_field(&dir.path().join("projection.csv")).unwrap();
    assert_eq!(out.len(), 21);
    assert!(out.values.iter().all(|v| v.norm() == 0.0));
    let side: Sidecar = read_json(&dir.path().join("projection.json")).unwrap();
    assert_eq!(side.error_bound, Some(0.0));
}

#[test]
fn delta_train_reproduces_lattice_values() {
    let dir = tempfile::tempdir().unwrap();
    let band = 2.5;
    let f = [0.3, -1.0, 2.0, 0.5, 0.0, 1.5, -0.25];
    let xs: Vec<f64> = (-3..=3).map(|l| l as f64 / (2.0 * band)).collect();
    let input = dir.path().join("train.csv");
    save_field(&input, &field_1d(&xs, &f)).unwrap();
    let o = rlimit(dir.path(), &["project", "--delta-train", "--band", "2.5", "--M", "5", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = load_field(&dir.path().join("projection.csv")).unwrap();
    for (v, fl) in out.values.iter().zip(f) {
        assert!((v - Complex64::new(2.0 * band * fl, 0.0)).norm() <= 1e-9 * 2.0 * band);
    }
}

#[test]
fn delta_train_rejects_off_lattice_samples() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("train.csv");
    save_field(&input, &field_1d(&[-0.5, 0.1, 0.5], &[1.0, 2.0, 3.0])).unwrap();
    let o = rlimit(dir.path(), &["project", "--delta-train", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not at l/(2B)"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let bad = p.join("bad.csv");
    fs::write(&bad, "1,3\n0,1,0\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["project", "--input", "does-not-exist.csv", "--kernel", "k.json"],
        vec!["project", "--input", bad.to_str().unwrap(), "--delta-train"],
        vec!["quad", "--preset", "no-such-rule", "--M", "4"],
        vec!["quad", "--preset", "gauss-legendre"],
        vec!["quad"],
        vec!["verify", "--suite", "no-such-suite"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = rlimit(p, &args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn verify_selected_suite_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = rlimit(dir.path(), &["verify", "--suite", "scaling-bound,lattice"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: rlimit::verify::VerifyReport = read_json(&dir.path().join("verify_report.json")).unwrap();
    assert_eq!(report.suites, ["scaling-bound", "lattice"]);
    assert!(report.checks.iter().all(|c| c.pass && (c.criterion == 2 || c.criterion == 3)));
    assert!(String::from_utf8_lossy(&o.stdout).lines().all(|l| !l.starts_with("FAIL")));
}

#[test]
fn verify_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // slack −1 turns every bound into zero, so nonzero residuals fail
    let o = rlimit(dir.path(), &["verify", "--suite", "moments", "--tol=-1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("failed checks"));
    assert!(dir.path().join("verify_report.json").exists());
}
