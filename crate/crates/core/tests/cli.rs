use std::path::PathBuf;
use std::process::{Command, Output};

use lsi_core::cli::{read_config, Format};
use tempfile::TempDir;

const TWO_POINT: &str = r#"{"R": 1.0, "atoms": [{"x": -1.0, "w": 0.5}, {"x": 1.0, "w": 0.5}]}"#;
const ENSEMBLE: &str = r#"{"n": 30, "entry_law": {"kind": "two_point", "R": 1.0},
    "partition": {"kind": "replicated_blocks", "d_n": "ceil_sqrt_log"},
    "delta": {"kind": "practical", "scale": 0.5}}"#;

fn lsi(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lsi"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("two_point.json"), TWO_POINT).unwrap();
        std::fs::write(dir.path().join("ensemble.json"), ENSEMBLE).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    /// Runs with `--out <name>` and returns the file contents.
    fn run(&self, args: &[&str], name: &str) -> (i32, String) {
        let out = self.arg(name);
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--out", &out]);
        let o = lsi(&full, &[]);
        let code = o.status.code().unwrap();
        let text = std::fs::read_to_string(self.path(name)).unwrap_or_default();
        (code, text)
    }
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn nd_bound_row_has_the_closed_form_log_value() {
    let o = lsi(&["bound", "--R", "1", "--delta", "1", "--n", "1", "--format", "csv"], &[]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["R", "delta", "n", "a", "bound_name", "log_value", "value"]);
    let row = reader
        .records()
        .map(Result::unwrap)
        .find(|r| &r[4] == "thm_nd")
        .unwrap();
    let log_value: f64 = row[5].parse().unwrap();
    assert!((log_value - (289f64.ln() + 25.0)).abs() < 1e-12);
}

#[test]
fn overflowing_linear_values_print_inf() {
    let o = lsi(&["bound", "--R", "1", "--delta", "0.001", "--n", "1", "--format", "csv"], &[]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let nd = text.lines().find(|l| l.contains("thm_nd")).unwrap();
    assert!(nd.ends_with(",inf"), "{nd}");
    let log: f64 = nd.split(',').nth(5).unwrap().parse().unwrap();
    assert!((log - (289f64.ln() + 20.0 + 5000.0)).abs() < 1e-9);
}

#[test]
fn bg_on_symmetric_measure_has_equal_functionals() {
    let ws = Workspace::new();
    let (code, text) = ws.run(&["bg", "--measure", &ws.arg("two_point.json"), "--delta", "0.5"], "bg.json");
    assert_eq!(code, 0);
    let v = json(&text);
    let r = &v["results"][0];
    let (d0, d1) = (r["d0"].as_f64().unwrap(), r["d1"].as_f64().unwrap());
    assert!(((d0 - d1) / d1).abs() < 1e-6);
    assert_eq!(v["seed"], serde_json::Value::Null);
    assert_eq!(v["partial"], false);
}

#[test]
fn sweep_reports_the_fitted_slope() {
    let ws = Workspace::new();
    let (code, text) = ws.run(
        &["sweep", "--measure", &ws.arg("two_point.json"), "--deltas", "0.05:0.5:10", "--estimator", "bg"],
        "sweep.json",
    );
    assert_eq!(code, 0);
    let v = json(&text);
    assert_eq!(v["results"].as_array().unwrap().len(), 10);
    let fit = &v["fit"];
    let adjusted = fit["adjusted_slope"].as_f64().unwrap();
    assert!((0.45..=0.55).contains(&adjusted), "{fit}");
    assert!(fit["slope"].as_f64().unwrap() > 0.0);
}

#[test]
fn emitted_json_reparses_into_the_same_configuration() {
    let ws = Workspace::new();
    let m = ws.arg("two_point.json");
    let e = ws.arg("ensemble.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["bound", "--R", "0.5,1", "--delta", "0.1:1:3", "--n", "1,2", "--a", "0.5"],
        vec!["bg", "--measure", &m, "--delta", "0.5,1"],
        vec!["lower", "--measure", &m, "--delta", "0.5", "--family", "step", "--params", "-0.5:0.5:5"],
        vec!["lemmas", "--measure", &m, "--delta", "0.5"],
        vec!["lemmas", "--gaussian", "--x", "0:40:5"],
        vec!["rmt", "--ensemble", &e, "--trials", "4", "--seed", "3", "--eps", "0.01"],
        vec!["sweep", "--measure", &m, "--deltas", "0.2:1:3", "--estimator", "lower"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let name = format!("run{i}.json");
        let (code, text) = ws.run(args, &name);
        assert_eq!(code, 0, "{args:?}");
        let cfg = read_config(&ws.path(&name)).unwrap();
        assert_eq!(cfg.format, Format::Json);
        let embedded: lsi_core::cli::RunConfig = serde_json::from_value(json(&text)["config"].clone()).unwrap();
        assert_eq!(cfg, embedded);
        // replaying the embedded configuration reproduces the file
        let replay = format!("replay{i}.json");
        let (code, again) = ws.run(&["replay", &ws.arg(&name)], &replay);
        assert_eq!(code, 0);
        assert_eq!(again, text, "{args:?}");
    }
}

#[test]
fn every_output_records_the_seed() {
    let ws = Workspace::new();
    let (_, csv_text) = ws.run(
        &["rmt", "--ensemble", &ws.arg("ensemble.json"), "--trials", "3", "--seed", "42", "--format", "csv"],
        "rmt.csv",
    );
    let mut lines = csv_text.lines();
    assert_eq!(lines.next(), Some("# lsi rmt"));
    assert_eq!(lines.next(), Some("# seed: 42"));
    let (_, json_text) = ws.run(&["rmt", "--ensemble", &ws.arg("ensemble.json"), "--trials", "3", "--seed", "42"], "rmt.json");
    assert_eq!(json(&json_text)["seed"], 42);
    let (_, bound) = ws.run(&["bound", "--R", "1", "--delta", "1", "--format", "csv"], "bound.csv");
    assert!(bound.lines().nth(1) == Some("# seed: none"));
}

#[test]
fn rmt_rows_follow_trial_order_whatever_the_thread_count() {
    let ws = Workspace::new();
    let e = ws.arg("ensemble.json");
    let args = ["rmt", "--ensemble", e.as_str(), "--trials", "12", "--seed", "9", "--format", "csv"];
    let one = lsi(&args, &[("LSI_THREADS", "1")]);
    let four = lsi(&args, &[("LSI_THREADS", "4")]);
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let trials: Vec<u64> = reader.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(trials, (0..12).collect::<Vec<_>>());
}

#[test]
fn usage_errors_exit_with_two() {
    let ws = Workspace::new();
    let m = ws.arg("two_point.json");
    std::fs::write(ws.path("broken.json"), "{\"R\": 1.0, \"atoms\": [{\"x\": 0.0, \"w\": 0.5}]}").unwrap();
    let broken = ws.arg("broken.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["rmt", "--ensemble", "ensemble.json", "--trials", "3"],
        vec!["bg", "--measure", &broken, "--delta", "1"],
        vec!["bg", "--measure", "/nonexistent/measure.json", "--delta", "1"],
        vec!["bg", "--measure", &m, "--delta", "0,1"],
        vec!["sweep", "--measure", &m, "--deltas", "0.5:0.05"],
        vec!["bound", "--R", "1", "--delta", "1", "--format", "xml"],
        vec!["frobnicate"],
        vec![],
    ];
    for args in cases {
        let o = lsi(&args, &[]);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(lsi(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn budget_overrun_exits_with_three_and_flags_partial_output() {
    let ws = Workspace::new();
    // Three grid nodes and no subdivisions: the wide panel integrals of 1/p
    // cannot reach their tolerance.
    let args = [
        "bg", "--measure", &ws.arg("two_point.json"), "--delta", "0.5",
        "--grid-points", "3", "--max-subdivisions", "0",
    ];
    let (code, text) = ws.run(&args, "budget.json");
    assert_eq!(code, 3);
    let v = json(&text);
    assert_eq!(v["partial"], true);
    assert_eq!(v["results"][0]["converged"], false);
    assert!(v["results"][0]["d1"].as_f64().unwrap() > 0.0);
    let (code, csv_text) = ws.run(&[&args[..], &["--format", "csv"]].concat(), "budget.csv");
    assert_eq!(code, 3);
    assert!(csv_text.contains("# partial: true"));
}
