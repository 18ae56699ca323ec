use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CANONICAL: &str = r#"{
  "dimension": 1,
  "g": {"kind": "sinusoid", "a": 1.0, "b": 0.5, "c": [1.0]},
  "alpha": {"kind": "constant", "a": 1.0},
  "beta": {"kind": "constant", "a": 1.0},
  "C": {"kind": "constant", "a": 1.0},
  "D0": {"kind": "constant", "a": 0.0}
}"#;

const FLAT: &str = r#"{
  "dimension": 1,
  "g": {"kind": "constant", "a": 1.0},
  "alpha": {"kind": "constant", "a": 1.0},
  "beta": {"kind": "constant", "a": 1.0},
  "C": {"kind": "constant", "a": 1.0},
  "D0": {"kind": "constant", "a": 0.0}
}"#;

const SECOND_ORDER: &str = r#"{
  "dimension": 1,
  "g": {"kind": "constant", "a": 1.0},
  "alpha": {"kind": "constant", "a": 2.0},
  "beta": {"kind": "constant", "a": 1.0},
  "C": {"kind": "constant", "a": 0.75},
  "D0": {"kind": "constant", "a": 0.25}
}"#;

const BAD_NORMALISATION: &str = r#"{
  "dimension": 1,
  "g": {"kind": "constant", "a": 1.0},
  "alpha": {"kind": "constant", "a": 1.0},
  "beta": {"kind": "constant", "a": 1.0},
  "C": {"kind": "constant", "a": 1.0},
  "D0": {"kind": "constant", "a": 0.5}
}"#;

fn frontier(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frontier")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn simulate_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", CANONICAL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = frontier(&["simulate", "--model", s(&model), "--n", "100", "--seed", "7", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let rows = read_csv(&a);
    assert_eq!(rows[0], ["x_1", "y"]);
    assert_eq!(rows.len(), 101);
}

#[test]
fn simulate_flat_model_reaches_frontier() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", FLAT);
    let out = dir.path().join("d.csv");
    let o = frontier(&["simulate", "--model", s(&model), "--n", "10000", "--seed", "3", "--out", s(&out)]);
    assert!(o.status.success());
    let max = read_csv(&out)[1..].iter().map(|r| r[1].parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(max > 0.999 && max <= 1.0, "max y {max}");
}

#[test]
fn invalid_model_exits_2_naming_invariant() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", BAD_NORMALISATION);
    let out = dir.path().join("d.csv");
    let o = frontier(&["simulate", "--model", s(&model), "--n", "10", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("normalisation"));
    assert!(!out.exists());
}

#[test]
fn missing_model_exits_1() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("none.json");
    let o = frontier(&["oracle-check", "--model", s(&missing)]);
    assert_eq!(o.status.code(), Some(1));
    let o = frontier(&["simulate", "--model", s(&missing), "--n", "5", "--out", s(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn estimate_constant_dataset_recovers_constant() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("x_1,y\n");
    for i in 0..200 {
        text.push_str(&format!("{},2.5\n", (i as f64 + 0.5) / 200.0));
    }
    let data = write(&dir, "c.csv", &text);
    let out = dir.path().join("e.csv");
    let o = frontier(&["estimate", "--data", s(&data), "--out", s(&out), "--p", "20", "--h", "0.05", "--grid", "21"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    assert_eq!(rows[0], ["x_1", "g_hat", "effective_count", "raw_inverse"]);
    assert_eq!(rows.len(), 22);
    for r in &rows[1..] {
        let g: f64 = r[1].parse().unwrap();
        assert!((g - 2.5).abs() <= 1e-12 * 2.5, "{r:?}");
    }
}

#[test]
fn estimate_rejects_zero_bandwidth() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "c.csv", "x_1,y\n0.5,1\n");
    let o = frontier(&["estimate", "--data", s(&data), "--out", s(&dir.path().join("e.csv")), "--p", "5", "--h", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn estimate_reports_parse_line() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "c.csv", "x_1,y\n0.5,1\n0.6,oops\n");
    let o = frontier(&["estimate", "--data", s(&data), "--out", s(&dir.path().join("e.csv")), "--p", "5", "--h", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn estimate_all_failed_exits_3() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "c.csv", "x_1,y\n0.01,1\n0.02,1\n");
    let out = dir.path().join("e.csv");
    let o = frontier(&["estimate", "--data", s(&data), "--out", s(&out), "--p", "5", "--h", "0.01", "--grid", "5"]);
    assert_eq!(o.status.code(), Some(3));
    let rows = read_csv(&out);
    assert!(rows[1..].iter().all(|r| r[1].is_empty()));
}

#[test]
fn estimate_with_schedule_succeeds_on_most_of_grid() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", CANONICAL);
    let data = dir.path().join("d.csv");
    let out = dir.path().join("e.csv");
    assert!(frontier(&["simulate", "--model", s(&model), "--n", "10000", "--seed", "11", "--out", s(&data)])
        .status
        .success());
    let o = frontier(&["estimate", "--data", s(&data), "--model", s(&model), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    let ok = rows[1..].iter().filter(|r| !r[1].is_empty()).count();
    assert_eq!(rows.len() - 1, 101);
    assert!(ok as f64 >= 0.9 * 101.0, "{ok} successes");
}

#[test]
fn mc_study_is_reproducible_and_accounts_failures() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", CANONICAL);
    let mut reports = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.json"));
        let o = frontier(&[
            "mc-study", "--model", s(&model), "--out", s(&out), "--sizes", "300,600", "--reps", "2", "--grid", "21",
            "--c1", "0.5", "--c2", "0.5", "--threads", threads,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let mut timings = out.clone().into_os_string();
        timings.push(".timings.json");
        assert!(Path::new(&timings).exists());
        reports.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);

    let report: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["cells"].as_array().unwrap().len(), 4);
    let summary = report["summary"].as_array().unwrap();
    for s in summary {
        let n = s["n"].as_u64().unwrap();
        let cell_failures: u64 = report["cells"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|c| c["n"].as_u64() == Some(n))
            .map(|c| c["failures"].as_u64().unwrap())
            .sum();
        assert_eq!(s["total_failures"].as_u64().unwrap(), cell_failures);
    }
}

#[test]
fn mc_study_rejects_bad_schedule_before_work() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", CANONICAL);
    let out = dir.path().join("r.json");
    let o = frontier(&["mc-study", "--model", s(&model), "--out", s(&out), "--c1", "0.8", "--c2", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = frontier(&["mc-study", "--model", s(&model), "--out", s(&out), "--sizes", "1000,500"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_check_flat_model_is_exact() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", FLAT);
    let out = dir.path().join("o.json");
    let o = frontier(&["oracle-check", "--model", s(&model), "--out", s(&out)]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    let bias = &report["bias_expansion"];
    assert_eq!(bias["exact_expected"], true);
    assert!(bias["max_gap"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn oracle_check_second_order_reports_normalised_gap() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", SECOND_ORDER);
    let o = frontier(&["oracle-check", "--model", s(&model)]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = report["bias_expansion"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["normalised_gap"].is_f64()));
}
