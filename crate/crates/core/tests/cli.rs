use std::f64::consts::PI;
use std::process::{Command, Output};

use jacobi_lusin::verify::VerificationReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jacobi-lusin")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn kernel_matches_chebyshev_closed_form() {
    let o = run(&["kernel", "--alpha", "-0.5", "--beta", "-0.5", "--t", "0.5", "--theta", "1.0", "--phi", "2.0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,phi,t,value"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let r = (-0.5f64).exp();
    let pr = |x: f64| (1.0 - r * r) / (1.0 - 2.0 * r * x.cos() + r * r);
    let exact = (pr(-1.0) + pr(3.0)) / (2.0 * PI);
    assert!((row[3] - exact).abs() < 1e-10 * exact);
}

#[test]
fn kernel_grid_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let o = run(&["kernel", "--t", "0.3,1", "--theta", "0.5,1.5,2.5", "--phi", "1,2", "--M", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);
    assert!(stdout(&o).is_empty());
}

#[test]
fn area_without_derivative_is_a_config_error() {
    let o = run(&["area", "--M", "0", "--N", "0", "--coeffs", "0,1", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("M + N > 0"), "{}", stderr(&o));
}

#[test]
fn invalid_parameters_and_unknown_input_exit_one() {
    assert_eq!(run(&["kernel", "--alpha", "-1.5", "--t", "1", "--theta", "1", "--phi", "2"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "nosuch"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "smooth-theta", "--gamma", "0.7"]).status.code(), Some(1));
}

#[test]
fn upsilon_and_square_functions_produce_csv() {
    let o = run(&["upsilon", "--W", "2", "--s", "0", "--t", "0.5", "--theta", "1", "--phi", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: f64 = stdout(&o).lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(v > 0.0 && v.is_finite());
    for cmd in ["area", "gfun"] {
        let o = run(&[cmd, "--coeffs", "0,1,0,1", "--theta", "0.7,2.1", "--panels", "12", "--eta-nodes", "12"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
        let rows: Vec<String> = stdout(&o).lines().skip(1).map(String::from).collect();
        assert_eq!(rows.len(), 2);
        for r in rows {
            let v: f64 = r.split(',').nth(3).unwrap().parse().unwrap();
            assert!(v > 0.0, "{cmd}: {r}");
        }
    }
}

#[test]
fn verify_omega_appends_a_parseable_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    for _ in 0..2 {
        let o = run(&["verify", "omega", "--alpha", "0.5", "--beta", "0.5", "--seed", "7", "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let reports: Vec<VerificationReport> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reports.len(), 2);
    assert!(reports[0].measured_c < 1e-9);
    assert_eq!(reports[0].without_timing(), reports[1].without_timing());
    let raw: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in ["suite", "alpha", "beta", "M", "N", "flavor", "gamma", "measuredC", "refinementDelta", "samples", "verdict", "seed", "runtimeMs", "version"] {
        assert!(raw.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn sweep_emits_one_report_per_job_and_hypothesis_errors_exit_one() {
    let o = run(&["sweep", "--suite", "estxyxi", "--alphas", "0.5,-0.5", "--orders", "1:0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
    // the majorant norm needs W >= 1
    assert_eq!(run(&["verify", "finbridge", "--W", "0.5", "--quick"]).status.code(), Some(1));
}
