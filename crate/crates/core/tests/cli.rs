use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use covkit::cli::RunManifest;

const DELAY_MODEL: &str = r#"{"m": 2, "dim_space": 1, "model": {"op": "schoenberg_exp", "params": {"t": 1.0},
    "children": [{"op": "pcv_delay", "params": {"delays": [[0.0], [0.35]]},
        "children": [{"op": "pcv_power", "params": {"alpha": 1.0, "m": 1}}]}]}}"#;

fn covkit(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_covkit")).args(args).env("COVKIT_THREADS", "2").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        Self(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_str().unwrap().to_string()
    }
}

fn grid_points(dir: &Dir, n: usize, spacing: f64) -> String {
    let body: String = (0..n).map(|k| format!("{}\n", k as f64 * spacing)).collect();
    dir.file("points.csv", &format!("x1\n{body}"))
}

#[test]
fn validate_exit_codes_follow_verdict() {
    let dir = Dir::new();
    let good = dir.file("good.json", DELAY_MODEL);
    let (code, err) = covkit(&["validate", "--model", &good, "--mode", "pd", "--out", &dir.path("good.out")]);
    assert_eq!(code, 0, "{err}");

    let bad = dir.file("bad.json", r#"{"m": 1, "dim_space": 1, "model": {"op": "power_law", "params": {"alpha": 2.5}}}"#);
    let (code, _) = covkit(&["validate", "--model", &bad, "--mode", "cnd", "--configs", "200", "--out", &dir.path("bad.out")]);
    assert_eq!(code, 1);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path("bad.out")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "fail");
    assert!(report["witness"]["coefficients"].is_array());

    let (code, _) = covkit(&["validate", "--model", &good, "--mode", "roundtrip", "--out", &dir.path("rt.out")]);
    assert_eq!(code, 1, "a covariance is not a variogram, so its Schoenberg exponentials are not all PD");
}

#[test]
fn input_errors_exit_two_with_position() {
    let dir = Dir::new();
    let broken = dir.file("broken.json", "{\"m\": 1,\n \"dim_space\": }");
    let (code, err) = covkit(&["validate", "--model", &broken, "--mode", "pd", "--out", &dir.path("x")]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");

    let unknown = dir.file("unknown.json", r#"{"m": 1, "dim_space": 1, "model": {"op": "nope"}}"#);
    let (code, err) = covkit(&["validate", "--model", &unknown, "--mode", "pd", "--out", &dir.path("x")]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown op"), "{err}");

    let (code, _) = covkit(&["validate", "--model", &dir.path("missing.json"), "--mode", "pd", "--out", &dir.path("x")]);
    assert_eq!(code, 2);
    assert!(!Path::new(&dir.path("x")).exists());

    let (code, _) = covkit(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn eval_writes_every_pair_and_a_manifest() {
    let dir = Dir::new();
    let model = dir.file("m.json", DELAY_MODEL);
    let points = grid_points(&dir, 3, 0.5);
    let out = dir.path("eval.csv");
    let (code, err) = covkit(&["eval", "--model", &model, "--points", &points, "--out", &out]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,j,c_0_0,c_0_1,c_1_0,c_1_1"));
    assert_eq!(lines.count(), 9);

    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(format!("{out}.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.command, "eval");
    assert_eq!(manifest.inputs.len(), 2);
    assert!(manifest.config_hash.is_some());
    assert_eq!(manifest.output, PathBuf::from(&out));
    assert_eq!(manifest.output_sha256.len(), 64);
}

#[test]
fn sample_then_estimate_round_trip() {
    let dir = Dir::new();
    let model = dir.file("m.json", DELAY_MODEL);
    let points = grid_points(&dir, 32, 0.1);
    let samples = dir.path("samples.csv");
    let (code, err) = covkit(&["sample", "--model", &model, "--points", &points, "--reals", "200", "--seed", "5", "--out", &samples]);
    assert_eq!(code, 0, "{err}");
    let lags = dir.file("lags.csv", "h1\n0\n0.1\n-0.3\n0.5\n");
    let est = dir.path("est.csv");
    let (code, err) = covkit(&["estimate", "--input", &samples, "--grid-spacing", "0.1", "--lags", &lags, "--batches", "10", "--out", &est]);
    assert_eq!(code, 0, "{err}");

    let mut rdr = csv::Reader::from_path(&est).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header[..3], ["h1", "pairs", "g_0_0"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    // Lag zero: the diagonal increments vanish identically.
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[0][1].parse::<usize>().unwrap(), 32);
    assert_eq!(rows[3][1].parse::<usize>().unwrap(), 27);
}

#[test]
fn sample_refuses_indefinite_models() {
    let dir = Dir::new();
    let bad = dir.file("bad.json", r#"{"m": 1, "dim_space": 1, "model": {"op": "schoenberg_exp", "params": {"t": 10.0}, "children": [{"op": "power_law", "params": {"alpha": 2.5}}]}}"#);
    let points = grid_points(&dir, 40, 0.1);
    let (code, err) = covkit(&["sample", "--model", &bad, "--points", &points, "--reals", "3", "--out", &dir.path("s.csv")]);
    assert_eq!(code, 1, "{err}");
    assert!(!Path::new(&dir.path("s.csv")).exists());
}

#[test]
fn bad_thread_setting_is_an_input_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_covkit"))
        .args(["eval", "--model", "x", "--points", "y", "--out", "z"])
        .env("COVKIT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
