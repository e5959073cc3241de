// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMOKE: &str = r#"
name = "smoke"
family = "matrix_game"
variant = "uniform11"
p = 6
q = 5
seed = [1, 2]
algorithm = ["grpda-l", "pda-l", "grpda"]
gap_tol = 1e-6
max_iters = 3000
record_iterates = true
"#;

fn bench(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_grpda-bench"));
    cmd.args(args).env_remove("GRPDA_OUT_DIR").current_dir(std::env::temp_dir());
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_check_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "smoke.toml", SMOKE);
    let out = dir.path().join("out");
    let o = bench(&["run", &cfg, "--out-dir", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    assert!(table.contains("grpda-l") && table.contains("gap tolerance"), "{table}");

    let trace = out.join("smoke_grpda-l_seed1.csv");
    for suffix in ["summary.json", "iterates.csv", "time_gap.dat", "iter_gap.dat"] {
        assert!(trace.with_extension(suffix).exists(), "{suffix}");
    }
    let all: Value = serde_json::from_str(&fs::read_to_string(out.join("smoke.summary.json")).unwrap()).unwrap();
    assert_eq!(all.as_array().unwrap().len(), 6);

    let o = bench(&["check", trace.to_str().unwrap(), "--strict"], &[]);
    assert!(o.status.success(), "{}", stdout(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let results = report["results"].as_array().unwrap();
    assert!(results.iter().all(|r| r["status"] != "fail"));
    assert!(results.iter().any(|r| r["name"] == "tau_cap" && r["status"] == "pass"));

    let o = bench(&["fit", trace.to_str().unwrap(), "--column", "gap", "--model", "semilog", "--from", "10"], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(fit["slope"].as_f64().unwrap() < 0.0);
    assert_eq!(fit["window"][0], 10);
}

#[test]
fn corrupted_trace_fails_strict_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "smoke.toml", SMOKE);
    let out = dir.path().join("out");
    assert!(bench(&["run", &cfg, "--out-dir", out.to_str().unwrap()], &[]).status.success());
    let trace = out.join("smoke_grpda-l_seed2.csv");
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[20].split(',').map(String::from).collect();
    cells[2] = "1e6".into();
    lines[20] = cells.join(",");
    fs::write(&trace, lines.join("\n") + "\n").unwrap();
    let o = bench(&["check", trace.to_str().unwrap(), "--strict"], &[]);
    assert!(!o.status.success());
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cap = report["results"].as_array().unwrap().iter().find(|r| r["name"] == "tau_cap").unwrap().clone();
    assert_eq!(cap["status"], "fail");
}

#[test]
fn bad_config_prints_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        "family = \"matrix_game\"\nvariant = \"uniform11\"\np = 4\nq = 4\nalgorithm = \"grpda-l\"\npsi = 2.0\ncolour = 1\n",
    );
    let o = bench(&["run", &cfg], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let stderr = String::from_utf8_lossy(&o.stderr);
    let err: Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(err["error"], "config");
    let keys: Vec<&str> = err["violations"].as_array().unwrap().iter().map(|v| v["key"].as_str().unwrap()).collect();
    assert!(keys.contains(&"psi") && keys.contains(&"colour"), "{keys:?}");
}

#[test]
fn missing_trace_is_an_io_error() {
    let o = bench(&["fit", "/nonexistent/trace.csv"], &[]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"], "trace");
}

#[test]
fn env_override_and_zero_budget() {
    let dir = tempfile::tempdir().unwrap();
    let text = "name = \"empty\"\nfamily = \"lasso\"\ncase = \"gaussian\"\np = 5\nq = 8\ns = 2\n\
                algorithm = \"grpda-l\"\nmax_iters = 0\n";
    let ignored = dir.path().join("ignored");
    let text = format!("{text}output_dir = {:?}\n", ignored.to_str().unwrap());
    let cfg = write_config(dir.path(), "empty.toml", &text);
    let target = dir.path().join("from_env");
    let o = bench(&["run", &cfg], &[("GRPDA_OUT_DIR", &target)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(target.join("empty_grpda-l_seed0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("iter,wall_seconds,"));
    assert!(!ignored.exists());
}
