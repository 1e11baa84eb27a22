//! End-to-end checks of the command surface: exit codes, field-path errors,
//! report values, and output formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tradetail")
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn analyze_scalar_benchmark_reports_known_values() {
    let out = run(&[
        "analyze",
        "--config",
        repo_config("scalar_iim.json").to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let report = &doc["report"];
    assert_eq!(report["case"], "IIM-geometric");
    let alpha = report["alpha"].as_f64().unwrap();
    let scale = report["scale"].as_f64().unwrap();
    assert!((alpha - 1.0).abs() < 1e-8, "alpha {alpha}");
    assert!((scale - 0.64872).abs() < 1e-4, "scale {scale}");
    let limit = report["paretian_limit"].as_f64().unwrap();
    assert!((limit - scale / alpha).abs() < 1e-12);
    assert!(doc["provenance"]["config_hash"].is_string());
}

#[test]
fn analyze_itm_case_c_classification() {
    let out = run(&[
        "analyze",
        "--config",
        repo_config("itm_case_c.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["report"]["case"], "ITM-c");
    assert_eq!(doc["report"]["correction_order"], 1);
}

#[test]
fn bad_probability_exits_with_config_error_and_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_temp(
        &dir,
        "bad.json",
        r#"{
            "model": {
                "regimes": [{"drift": 0.0, "diffusion_var": 1.0}],
                "generator": [[0.0]],
                "initial_distribution": [1.0]
            },
            "timing": {"family": "iim", "probabilities": [1.2], "weights": [1.0]}
        }"#,
    );
    let out = run(&["analyze", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("timing.probabilities[0]"),
        "stderr: {stderr}"
    );
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = run(&["analyze", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn no_solution_exits_with_analysis_error() {
    let dir = tempfile::tempdir().unwrap();
    // pure negative drift has no finite upper-tail exponent
    let config = write_temp(
        &dir,
        "drift.json",
        r#"{
            "model": {
                "regimes": [{"drift": -0.5, "diffusion_var": 0.0}],
                "generator": [[0.0]],
                "initial_distribution": [1.0]
            },
            "timing": {"family": "iim", "probabilities": [0.5], "weights": [1.0]},
            "analysis": {"alpha_max": 10.0}
        }"#,
    );
    let out = run(&["analyze", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no exponent"), "stderr: {stderr}");
}

#[test]
fn zero_sample_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_temp(
        &dir,
        "zero.json",
        r#"{
            "model": {
                "regimes": [{"drift": 0.0, "diffusion_var": 1.0}],
                "generator": [[0.0]],
                "initial_distribution": [1.0]
            },
            "timing": {"family": "iim", "probabilities": [0.5], "weights": [1.0]},
            "simulation": {"count": 0}
        }"#,
    );
    let out_path = dir.path().join("samples.csv");
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simulation.count"));
}

#[test]
fn simulate_writes_deterministic_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_temp(
        &dir,
        "sim.json",
        r#"{
            "model": {
                "regimes": [{"drift": 0.0, "diffusion_var": 1.0}],
                "generator": [[0.0]],
                "initial_distribution": [1.0]
            },
            "timing": {"family": "iim", "probabilities": [0.4], "weights": [1.0]},
            "simulation": {"count": 5000, "seed": 9, "streams": 4}
        }"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b);

    let text = String::from_utf8(bytes_a).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("seed=9"));
    assert!(header.contains("streams=4"));
    assert!(header.contains("count=5000"));
    assert!(header.contains("model_hash=0x"));
    assert_eq!(lines.next().unwrap(), "x_t,trade_time,stream");
    assert_eq!(lines.count(), 5000);

    // the seed override changes the bytes
    let c = dir.path().join("c.csv");
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
        "--seed",
        "10",
    ]);
    assert!(out.status.success());
    assert_ne!(std::fs::read(&c).unwrap(), bytes_b);
}

#[test]
fn validate_passes_on_the_scalar_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.csv");
    let out = run(&[
        "validate",
        "--config",
        repo_config("scalar_iim.json").to_str().unwrap(),
        "--out",
        curve.to_str().unwrap(),
        "--samples",
        "1000000",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        out.status.success(),
        "stdout: {stdout}\nstderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout.contains("hill-exponent"));
    assert!(stdout.contains("scale-plateau"));
    assert!(stdout.contains("overall: PASS"));

    let curve_text = std::fs::read_to_string(&curve).unwrap();
    assert!(curve_text.starts_with("y,y_pow_alpha_survival\n"));
    assert!(curve_text.lines().count() > 100);
}

#[test]
fn validate_honors_tolerance_overrides() {
    // an absurdly tight hill tolerance must fail the otherwise-passing run
    let out = run(&[
        "validate",
        "--config",
        repo_config("scalar_iim.json").to_str().unwrap(),
        "--samples",
        "200000",
        "--tolerance-json",
        r#"{"hill_relative": 1e-9}"#,
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout).contains("overall: FAIL"));

    let out = run(&[
        "validate",
        "--config",
        repo_config("scalar_iim.json").to_str().unwrap(),
        "--samples",
        "1000",
        "--tolerance-json",
        r#"{"hill_relative": oops}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn density_tabulates_the_trade_time_law() {
    let out = run(&[
        "density",
        "--config",
        repo_config("itm_case_c.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,density");
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let mut split = l.split(',');
            (
                split.next().unwrap().parse().unwrap(),
                split.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert!(rows.len() > 100);
    // trapezoid mass over the tabulated range is close to the 99.9% coverage
    let mut mass = rows[0].0 * rows[0].1 / 2.0;
    for w in rows.windows(2) {
        mass += (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0;
    }
    assert!((mass - 1.0).abs() < 0.01, "mass {mass}");

    // geometric pmf table for incidence timing
    let out = run(&[
        "density",
        "--config",
        repo_config("scalar_iim.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,probability");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    let p0: f64 = first[1].parse().unwrap();
    assert!((p0 - 0.3934693402873666).abs() < 1e-12);
}

#[test]
fn mgf_table_normalizes_at_zero() {
    let out = run(&[
        "mgf",
        "--config",
        repo_config("scalar_itm.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut split = l.split(',');
            (
                split.next().unwrap().parse().unwrap(),
                split.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert!(rows.len() > 30);
    // the value nearest s = 0 must be near 1, and values grow toward the pole
    let (s_near, v_near) = rows
        .iter()
        .copied()
        .min_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap())
        .unwrap();
    assert!(s_near.abs() < 0.1);
    assert!((v_near - 1.0).abs() < 0.1, "mgf near zero {v_near}");
    assert!(rows.last().unwrap().1 > v_near);
}

#[test]
fn corrupted_exponent_fails_the_hill_check() {
    // op-level version of a forced mismatch: inflate alpha by half
    use tradetail_core::models;
    use tradetail_core::tail::TimingModel;
    let model = models::scalar_brownian(0.0, 1.0);
    let timing = models::scalar_iim_benchmark_timing();
    let mut report = tradetail_core::iim_report(&model, &timing).unwrap();
    let batch =
        tradetail_core::run_batch(&model, &TimingModel::Iim(timing), 500_000, 5, 8, 1.0).unwrap();
    let good = tradetail_core::validate(&report, &batch, &Default::default());
    assert!(good.passed);

    report.alpha *= 1.5;
    let bad = tradetail_core::validate(&report, &batch, &Default::default());
    assert!(!bad.passed);
    assert!(bad
        .checks
        .iter()
        .any(|c| c.name == "hill-exponent" && c.verdict == tradetail_core::Verdict::Fail));
}

#[test]
fn lattice_timing_skips_the_paretian_check_instead_of_failing() {
    use tradetail_core::process::{JumpLaw, ModulatedModel, RegimeExponent};
    use tradetail_core::tail::TimingModel;
    let regime = RegimeExponent {
        drift: 0.0,
        diffusion_var: 0.0,
        jump_intensity: 1.0,
        jump_law: JumpLaw::Degenerate { size: 1.0 },
    };
    let model = ModulatedModel::new(
        vec![regime],
        nalgebra::DMatrix::zeros(1, 1),
        nalgebra::DVector::from_element(1, 1.0),
    )
    .unwrap();
    let timing = tradetail_core::tail::IimTiming::new(vec![0.3], vec![1.0], 1).unwrap();
    let report = tradetail_core::iim_report(&model, &timing).unwrap();
    assert!(
        report.paretian_limit.is_none(),
        "lattice jumps recur off-axis"
    );

    let batch =
        tradetail_core::run_batch(&model, &TimingModel::Iim(timing), 500_000, 6, 8, 1.0).unwrap();
    let summary = tradetail_core::validate(&report, &batch, &Default::default());
    assert!(summary
        .checks
        .iter()
        .any(|c| c.name == "scale-plateau" && c.verdict == tradetail_core::Verdict::Skipped));
}
