use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qubit_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/qubit_fejer.json")
}

fn decolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decolab")).args(args).output().expect("binary runs")
}

fn run_with(sub: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    decolab(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Writes the qubit config with `from` replaced by `to`.
fn variant(dir: &tempfile::TempDir, from: &str, to: &str) -> PathBuf {
    let text = std::fs::read_to_string(qubit_config()).unwrap();
    assert!(text.contains(from), "{from} not in config");
    let path = dir.path().join("config.json");
    std::fs::write(&path, text.replace(from, to)).unwrap();
    path
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn thresholds_of_qubit_config() {
    let out = run_with("thresholds", &qubit_config(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][column(&header, "alpha_d")], "2");
    assert_eq!(rows[0][column(&header, "lambda_0")], "1");
    assert_eq!(rows[0][column(&header, "alpha_0")], "8");
}

#[test]
fn coherence_sweep_crosses_threshold_deterministically() {
    let first = run_with("coherence-sweep", &qubit_config(), &[]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let text = stdout(&first);
    assert!(!text.contains('\r'));
    let (header, rows) = csv_rows(&text);
    for name in [
        "alpha",
        "beta",
        "max_offdiag_coherence",
        "max_pointer_overlap",
        "oracle_residual",
        "decohered",
        "orthogonal",
        "config_hash",
    ] {
        column(&header, name);
    }
    assert_eq!(rows.len(), 5);
    let (a, d, c) = (column(&header, "alpha"), column(&header, "decohered"), column(&header, "max_offdiag_coherence"));
    let hash = &rows[0][column(&header, "config_hash")];
    for row in &rows {
        let alpha: f64 = row[a].parse().unwrap();
        assert_eq!(row[d], (alpha > 2.0).to_string(), "alpha {alpha}");
        if alpha > 2.0 {
            assert_eq!(row[c], "0");
        }
        assert_eq!(&row[column(&header, "config_hash")], hash);
    }
    let second = run_with("coherence-sweep", &qubit_config(), &[]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn json_output_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = run_with("thresholds", &qubit_config(), &["--format", "json", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["thresholds"]["alpha_d"], 2.0);
    assert_eq!(v["thresholds"]["alpha_0"], 8.0);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 16);
}

#[test]
fn negative_kappa_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = variant(&dir, r#""kappa": 1.0"#, r#""kappa": -1.0"#);
    let out = run_with("thresholds", &bad, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("probe.params.kappa"), "{}", stderr(&out));
}

#[test]
fn type_errors_report_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = variant(&dir, r#""lambda": 2.0"#, r#""lambda": "two""#);
    let out = run_with("coherence-sweep", &bad, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("couplings.lambda"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(decolab(&["frobnicate", "--config", "x.json"]).status.code(), Some(64));
    assert_eq!(decolab(&["thresholds"]).status.code(), Some(64));
    assert_eq!(decolab(&["thresholds", "--config", "x.json", "--format", "xml"]).status.code(), Some(64));
}

#[test]
fn slightly_off_amplitudes_warn() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(&dir, "[0.7071067811865476, 0.7071067811865476]", "[0.7071070, 0.7071070]");
    let out = run_with("thresholds", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("renormalized"));
}

#[test]
fn orthogonality_above_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(
        &dir,
        r#""alpha_sweep": { "min": 1.0, "max": 3.0, "steps": 5 }"#,
        r#""alpha": 10.0"#,
    );
    let out = run_with("orthogonality", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows[0][column(&header, "orthogonal")], "true");
    for name in ["pvm_max_cross", "pvm_max_idempotence", "pvm_completeness"] {
        let v: f64 = rows[0][column(&header, name)].parse().unwrap();
        assert!(v <= 1e-6, "{name} = {v}");
    }
}

#[test]
fn dense_check_flags_unattainable_tolerance() {
    let out = run_with("dense-check", &qubit_config(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let dir = tempfile::tempdir().unwrap();
    let strict = variant(&dir, r#""quadrature": 1e-6"#, r#""quadrature": 1e-15"#);
    let out = run_with("dense-check", &strict, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("contract violation"));
}

#[test]
fn baseline_gaussian_table() {
    let out = run_with("baseline", &qubit_config(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = csv_rows(&stdout(&out));
    let row = rows.iter().find(|r| r[column(&header, "alpha")] == "2").unwrap();
    let f: f64 = row[column(&header, "factor")].parse().unwrap();
    assert!((f - (-1.0f64).exp()).abs() < 1e-12);
    let json = run_with("baseline", &qubit_config(), &["--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!((v["premeasurement"]["purity"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(v["reduction"]["max_offdiag_norm"], 0.0);
}

#[test]
fn auto_range_failure_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(&dir, r#""pointer_range": 40.0"#, r#""pointer_range": "auto""#);
    let out = run_with("baseline", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("grids.pointer_range"));
}

#[test]
fn seeded_lemma_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(&dir, r#""kind": "fejer", "params": { "kappa": 0.5 }"#, r#""kind": "gamma_reciprocal", "params": { "g_a": 2.0, "g_b": 0.5 }"#);
    let a = run_with("lemma", &cfg, &["--seed", "11"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = run_with("lemma", &cfg, &["--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let (header, rows) = csv_rows(&stdout(&a));
    let (beyond, q) = (column(&header, "beyond_type"), column(&header, "quadrature_magnitude"));
    assert!(rows.len() > 2 * 50);
    for row in rows.iter().filter(|r| r[beyond] == "true") {
        assert!(row[q].parse::<f64>().unwrap() <= 1e-6);
    }
}
