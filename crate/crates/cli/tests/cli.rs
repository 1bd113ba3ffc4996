//! End-to-end binary tests: report correctness, bit-identical reproducibility,
//! CSV emission, config files, and error channels.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trace-forms"))
}

fn run_ok(args: &[&str]) -> serde_json::Value {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn run_fail(args: &[&str]) -> (Output, serde_json::Value) {
    let out = bin().args(args).output().unwrap();
    assert!(!out.status.success(), "{:?} unexpectedly succeeded", args);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr)
        .unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&out.stderr)));
    (out, err)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("trace-forms-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn repro_hexagon_emits_closed_forms() {
    let report = run_ok(&["repro", "hexagon"]);
    let results = &report["results"];
    let off = 2.0 - 1.5 * 2.0_f64.sqrt();
    assert!((results["t_off_diagonal"].as_f64().unwrap() - off).abs() < 1e-12);
    let mean = 1.0 - 0.75 * 2.0_f64.sqrt();
    assert!((results["mean_coefficient"].as_f64().unwrap() - mean).abs() < 1e-12);
    assert_eq!(results["pass"], serde_json::json!(true));
    assert_eq!(report["command"], serde_json::json!("repro"));
    assert_eq!(report["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reports_are_bit_identical_for_identical_configs() {
    let args = [
        "cone-avg", "--N", "4", "--k", "2", "--body", "linf", "--samples", "2e4", "--seed", "7",
        "--matrix", "random:seed=3",
    ];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn cone_avg_estimates_lambda_k() {
    let report = run_ok(&[
        "cone-avg", "--N", "4", "--k", "2", "--body", "linf", "--samples", "5e4", "--seed", "7",
        "--matrix", "random:seed=3",
    ]);
    let r = &report["results"];
    let estimate = r["estimate"].as_f64().unwrap();
    let exact = r["exact"].as_f64().unwrap();
    let stderr = r["stderr"].as_f64().unwrap();
    assert!((estimate - exact).abs() <= 5.0 * stderr, "estimate {} exact {} stderr {}", estimate, exact, stderr);
    assert!(r["duality_gap"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report["nodes"].as_u64().unwrap(), 50_000);
    assert_eq!(report["seed"].as_u64().unwrap(), 7);
}

#[test]
fn hyper_avg_on_hexagon_reproduces_the_counterexample() {
    let report = run_ok(&[
        "hyper-avg", "--N", "2", "--k", "1", "--body", "hexagon", "--quad", "exact",
        "--matrix", "file:tests/data/shear.json",
    ]);
    let r = &report["results"];
    let off = 2.0 - 1.5 * 2.0_f64.sqrt();
    assert!((r["estimate"].as_f64().unwrap() - off).abs() < 1e-12);
    assert!((r["mean_coefficient"].as_f64().unwrap() - (1.0 - 0.75 * 2.0_f64.sqrt())).abs() < 1e-12);
    assert!((r["exact"].as_f64().unwrap()).abs() < 1e-15);
}

#[test]
fn exact_matches_minor_sums() {
    let report = run_ok(&["exact", "--matrix", "random:seed=5", "--n", "4", "--k", "2"]);
    let r = &report["results"];
    assert_eq!(r["higher_traces"].as_array().unwrap().len(), 5);
    assert!(r["max_cross_deviation_rel"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r["lambda_k"], r["minor_sums"][1]);
}

#[test]
fn design_check_all_k_passes_and_c2_fails() {
    let report = run_ok(&["design-check", "--group", "hyperoctahedral:3", "--all-k"]);
    let r = &report["results"];
    assert_eq!(r["all_pass"], serde_json::json!(true));
    assert_eq!(r["per_k"].as_array().unwrap().len(), 3);
    assert!(r["max_defect"].as_f64().unwrap() < 1e-10);

    let report = run_ok(&["design-check", "--group", "c:2"]);
    let r = &report["results"];
    assert_eq!(r["all_pass"], serde_json::json!(false));
    assert!(r["max_defect"].as_f64().unwrap() >= 0.5);
}

#[test]
fn isotropy_cone_measure_is_isotropic_for_an_asymmetric_polytope() {
    let report = run_ok(&[
        "isotropy", "--body", "random-poly:m=3,extra=4,seed=12", "--measure", "cone",
    ]);
    let r = &report["results"];
    assert!(r["max_defect"].as_f64().unwrap() <= 1e-12);
    assert_eq!(r["scheme"], serde_json::json!("facet-exact"));
}

#[test]
fn discrete_formula_matches_trace() {
    let report = run_ok(&[
        "discrete", "--body", "cross:m=3", "--matrix", "random:seed=8",
    ]);
    assert!(report["results"]["deviation"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn grassmann_z_score_is_reported() {
    let report = run_ok(&[
        "grassmann", "--N", "5", "--k", "2", "--samples", "2e4", "--seed", "21",
        "--matrix", "random:seed=4",
    ]);
    let r = &report["results"];
    assert!(r["z"].as_f64().unwrap().abs() <= 4.0);
    assert_eq!(report["nodes"].as_u64().unwrap(), 20_000);
}

#[test]
fn perturb_writes_the_sweep_csv() {
    let csv_path = tmp("perturb.csv");
    let out_path = tmp("perturb.json");
    let status = bin()
        .args([
            "perturb", "--g", "cos2", "--ladder", "1e-2,1e-3", "--quad", "angular:1024",
            "--csv", csv_path.to_str().unwrap(), "--out", out_path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["results"]["agrees"], serde_json::json!(true));
    let diag = report["results"]["extrapolated"][0][0].as_f64().unwrap();
    assert!((diag + 0.5).abs() < 1e-3);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "eps,slope_00,slope_10,slope_01,slope_11");
    // Two ladder rows plus the extrapolated eps = 0 row.
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("0,"));
}

#[test]
fn alpha_scan_matches_the_closed_form_slope() {
    let csv_path = tmp("alpha.csv");
    let report = run_ok(&[
        "alpha-scan", "--alphas", "0.5,1,2,3", "--csv", csv_path.to_str().unwrap(),
    ]);
    let rows = report["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert_eq!(row["pass"], serde_json::json!(true));
        let alpha = row["alpha"].as_f64().unwrap();
        let predicted = row["predicted"].as_f64().unwrap();
        assert!((predicted - (alpha - 1.0) / 2.0).abs() < 1e-12);
    }
    assert_eq!(report["results"]["all_pass"], serde_json::json!(true));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "alpha,numeric,predicted,gap");
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn config_files_round_trip_through_the_binary() {
    let cfg_path = tmp("avg.toml");
    let r1_path = tmp("r1.json");
    let r2_path = tmp("r2.json");
    let status = bin()
        .args([
            "cone-avg", "--N", "4", "--k", "2", "--body", "l1", "--samples", "1e4", "--seed", "3",
            "--matrix", "random:seed=6",
            "--emit-config", cfg_path.to_str().unwrap(), "--out", r1_path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let status = bin()
        .args(["cone-avg", "--config", cfg_path.to_str().unwrap(), "--out", r2_path.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read(&r1_path).unwrap(), std::fs::read(&r2_path).unwrap());

    // The config file names its experiment; other subcommands refuse it.
    let (out, err) = run_fail(&["hyper-avg", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(err["error"]["kind"], serde_json::json!("config"));
}

#[test]
fn errors_are_machine_readable_with_distinct_exit_codes() {
    // Missing seed for Monte Carlo quadrature: a config error, exit 2.
    let (out, err) = run_fail(&[
        "cone-avg", "--N", "4", "--k", "2", "--body", "linf", "--samples", "1e4",
        "--matrix", "random:seed=3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(err["error"]["kind"], serde_json::json!("config"));

    // A body violating strict convexity: a module invariant, exit 1.
    let (out, err) = run_fail(&["isotropy", "--body", "smooth:eps=0.4,g=cos2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(err["error"]["kind"], serde_json::json!("strictness-violation"));

    // Unknown repro case.
    let (out, err) = run_fail(&["repro", "no-such-case"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(err["error"]["message"].as_str().unwrap().contains("unknown repro case"));
}

#[test]
fn worker_count_does_not_change_design_reports() {
    let args = ["design-check", "--group", "hyperoctahedral:4", "--all-k"];
    let one = bin().args(args).env("TRACE_FORMS_WORKERS", "1").output().unwrap();
    let four = bin().args(args).env("TRACE_FORMS_WORKERS", "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn repro_all_passes_every_case() {
    let report = run_ok(&["repro", "all"]);
    let results = &report["results"];
    assert_eq!(results["all_pass"], serde_json::json!(true));
    let cases = results["cases"].as_object().unwrap();
    assert_eq!(cases.len(), 11);
    for (name, value) in cases {
        assert_eq!(value["pass"], serde_json::json!(true), "case {} failed", name);
    }
}
