use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn aggint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aggint"))
        .args(args)
        .env_remove("AGGINT_SEED")
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("aggint-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV written by the tool: comment lines and the column
/// header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn levy_density_at_one() {
    let o = aggint(&["pdf", "--alpha", "4", "--k", "1", "--r", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# aggint pdf\n# schema_version = 1\n# config = {"));
    let v: f64 = rows(&text)[0][1].parse().unwrap();
    let want = (-0.25f64).exp() / (2.0 * PI.sqrt());
    assert!((v - want).abs() < 1e-15 * want, "{v} vs {want}");
}

#[test]
fn point_mass_is_rejected_with_code_2() {
    let o = aggint(&["pdf", "--alpha", "2", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("point mass"), "{}", stderr(&o));
}

#[test]
fn protection_disk_covering_network_is_rejected() {
    let o = aggint(&["pdf", "--alpha", "4", "--rmax", "3.4", "--rp", "70", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty"), "{}", stderr(&o));
}

#[test]
fn both_model_forms_is_a_config_error() {
    let o = aggint(&["cdf", "--alpha", "4", "--k", "1", "--lambda", "1", "--rmax", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = aggint(&["cdf", "--alpha", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn truncation_rule_violation_is_a_geometry_error() {
    let o = aggint(&["cdf", "--alpha", "4", "--lambda", "0.05", "--rmax", "9", "--epsilon", "0.01", "--r", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("truncation"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_names_its_path() {
    let path = scratch("bad.toml");
    std::fs::write(&path, "[model]\nalpha = 4.0\n[model.fading]\nmean_pwr = 2.0\n").unwrap();
    let o = aggint(&["pdf", "--k", "1", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model.fading.mean_pwr"), "{}", stderr(&o));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let path = scratch("good.toml");
    std::fs::write(&path, "seed = 5\n[model]\nalpha = 4.0\nk = 2.0\n[grid]\nvalues = [1.0]\n").unwrap();
    let file_only = stdout(&aggint(&["pdf", "--config", path.to_str().unwrap()]));
    let flagged = stdout(&aggint(&["pdf", "--config", path.to_str().unwrap(), "--k", "1"]));
    let v = |s: &str| rows(s)[0][1].parse::<f64>().unwrap();
    let levy = |k: f64| k * (-k * k / 4.0f64).exp() / (2.0 * PI.sqrt());
    assert!((v(&file_only) - levy(2.0)).abs() < 1e-14);
    assert!((v(&flagged) - levy(1.0)).abs() < 1e-14);
    assert!(file_only.contains("\"seed\":5"));
}

#[test]
fn seed_precedence_flag_then_file_then_env() {
    let run = |args: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_aggint"));
        c.args(args).env_remove("AGGINT_SEED");
        if let Some(e) = env {
            c.env("AGGINT_SEED", e);
        }
        stdout(&c.output().unwrap())
    };
    let base = ["simulate", "--alpha", "4", "--lambda", "0.05", "--rmax", "10", "--trials", "10"];
    assert!(run(&base, None).contains("\"seed_used\":1"));
    assert!(run(&base, Some("9")).contains("\"seed_used\":9"));
    let mut flagged = base.to_vec();
    flagged.extend(["--seed", "3"]);
    assert!(run(&flagged, Some("9")).contains("\"seed_used\":3"));
    let path = scratch("seed.toml");
    std::fs::write(&path, "seed = 4\n").unwrap();
    let mut filed = base.to_vec();
    filed.extend(["--config", path.to_str().unwrap()]);
    assert!(run(&filed, Some("9")).contains("\"seed_used\":4"));
}

#[test]
fn help_lists_keys_with_units() {
    for cmd in ["pdf", "cdf", "mean", "entropy", "simulate", "detect", "validate"] {
        let o = aggint(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        assert!(text.contains("Exit codes"), "{cmd}");
        assert!(text.contains("seed") && text.contains("[integer]"), "{cmd}");
    }
    let text = stdout(&aggint(&["detect", "--help"]));
    for key in [
        "n_samples", "smoothing_factor", "target_pfa", "reference_delta", "beta", "inr_db", "snr_grid_db",
        "holdout_trials", "calibration_trials", "[dB]", "[nats]", "[probability]",
    ] {
        assert!(text.contains(key), "detect help lacks {key}");
    }
    let text = stdout(&aggint(&["pdf", "--help"]));
    for key in ["alpha", "lambda", "r_max", "r_p", "r_dec", "epsilon", "mean_power", "[distance]", "[nodes per unit area]"] {
        assert!(text.contains(key), "pdf help lacks {key}");
    }
}

#[test]
fn oracle_column_and_paper_literal_column() {
    let o = aggint(&["pdf", "--alpha", "6", "--k", "1", "--grid", "log:0.1:100:7", "--oracle", "--paper-literal"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("r,pdf_canonical,pdf_paper_literal,pdf_ltinv"));
    for row in rows(&text) {
        let c: f64 = row[1].parse().unwrap();
        let o: f64 = row[3].parse().unwrap();
        assert!(((c - o) / c).abs() < 1e-6);
    }
}

#[test]
fn oracle_disagreement_exits_3() {
    // a tolerance below the inversion's own accuracy forces a disagreement
    let o = aggint(&["pdf", "--alpha", "3", "--k", "1", "--r", "0.5,1,2", "--oracle", "--oracle-tol", "1e-18"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn mean_reports_missing_root_for_alpha_3() {
    let o = aggint(&["mean", "--alpha", "3", "--k", "0.5598", "--r", "3.4", "--paper-literal"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(rows(&stdout(&o))[0][3], "no_root");
}

#[test]
fn entropy_target_round_trips() {
    let o = aggint(&["entropy", "--alpha", "4", "--target-delta", "2.62"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let delta: f64 = rows(&stdout(&o))[0][3].parse().unwrap();
    assert!((delta - 2.62).abs() < 1e-8, "{delta}");
}

#[test]
fn simulate_json_has_summary_and_ks() {
    let json = scratch("sim.json");
    let o = aggint(&[
        "simulate", "--alpha", "4", "--lambda", "0.05", "--rmax", "20", "--trials", "4000", "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(rows(&stdout(&o)).len(), 4000);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["samples"].as_array().unwrap().len(), 4000);
    assert!(doc["analytic"]["ks_distance"].as_f64().unwrap() < 0.05);
    assert!(doc["config"].get("workers").is_none());
}

#[test]
fn validate_catches_negated_k() {
    let out = scratch("fault.json");
    let o = aggint(&[
        "validate", "--inject-fault", "negate-k", "--mc-trials", "2000", "--seed", "11", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["seed"], 11);
    assert_eq!(doc["passed"], false);
    let norm = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "normalization")
        .unwrap();
    assert_eq!(norm["passed"], false);
}

#[test]
fn validate_report_structure() {
    let out = scratch("report.json");
    let o = aggint(&["validate", "--mc-trials", "3000", "--seed", "5", "--out", out.to_str().unwrap()]);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["config"]["seed"], 5);
    let checks = doc["checks"].as_array().unwrap();
    assert!(checks.len() >= 7);
    for c in checks {
        assert!(c["name"].is_string() && c["bound"].is_number() && c["passed"].is_boolean());
    }
    let all = checks.iter().all(|c| c["passed"] == true || c["informational"] == true);
    assert_eq!(doc["passed"], all);
    assert_eq!(o.status.code(), Some(if all { 0 } else { 3 }));
}

#[test]
fn detect_writes_curve_with_achieved_pfa() {
    let out = scratch("curve.csv");
    let json = scratch("curve.json");
    let o = aggint(&[
        "detect", "--pfa", "0.1", "--delta", "2.62", "--snr", "-20:0:10", "--n-samples", "500", "--trials", "100",
        "--calibration-trials", "600", "--holdout-trials", "500", "--out", out.to_str().unwrap(), "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# result = ") && l.contains("\"pfa_achieved\"")));
    assert_eq!(rows(&text).len(), 3);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc["config"]["detector"]["delta"], 2.62);
    assert_eq!(doc["pd"].as_array().unwrap().len(), 3);
}

#[test]
fn detect_rejects_too_few_calibration_trials() {
    let o = aggint(&["detect", "--calibration-trials", "100", "--pfa", "0.1", "--n-samples", "200"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
