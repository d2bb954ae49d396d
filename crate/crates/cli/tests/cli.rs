// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! End-to-end checks of the `ftps` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ftps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftps"))
        .args(args)
        .env_remove("FTPS_THREADS")
        .output()
        .expect("binary runs")
}

fn error_kind(out: &Output) -> String {
    let line = String::from_utf8_lossy(&out.stderr);
    let last = line.lines().last().unwrap_or_default();
    let v: Value = serde_json::from_str(last).unwrap_or_else(|_| panic!("stderr is not JSON: {line}"));
    v["error"]["kind"].as_str().unwrap().to_string()
}

const RUN: &str = r#"
seed = 5
n_trials = 300

[block]
kind = "preparation"
distance = 4
depth = 4

[noise]
p_error = 0.02
p_erasure = 0.01

[[rules]]
kind = "gap"

[[rules]]
kind = "annular_syndrome"
alpha = 1.0

[[rules]]
kind = "radial_gap"
alpha = 0.1
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_exits_zero() {
    let out = ftps(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["calibrate", "run", "buffer", "validate"] {
        assert!(text.contains(cmd), "{text}");
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = ftps(&["run", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "usage");
}

#[test]
fn run_writes_artifacts_reproducibly() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), RUN);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out = ftps(&[
        "run",
        "--config",
        &config,
        "--out",
        a.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = ftps(&[
        "run",
        "--config",
        &config,
        "--out",
        b.to_str().unwrap(),
        "--threads",
        "3",
    ]);
    assert!(out.status.success());

    for file in ["trials.jsonl", "curves.csv", "diagnostics.csv", "breakeven.csv"] {
        let x = fs::read(a.join(file)).unwrap();
        assert!(!x.is_empty(), "{file}");
        assert_eq!(x, fs::read(b.join(file)).unwrap(), "{file}");
    }
    let curves = fs::read_to_string(a.join("curves.csv")).unwrap();
    assert!(curves.starts_with("rule,kappa,p_enc,stderr\n"));
    let diags = fs::read_to_string(a.join("diagnostics.csv")).unwrap();
    assert!(diags.starts_with("rule,score_bin_lo,score_bin_hi,count,eer,stderr\n"));
    assert_eq!(fs::read_to_string(a.join("trials.jsonl")).unwrap().lines().count(), 300);

    // Summaries differ only in the output path echoed from the command line.
    let sa: Value = serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    let sb: Value = serde_json::from_str(&fs::read_to_string(b.join("summary.json")).unwrap()).unwrap();
    assert_eq!(sa["master_seed"], 5);
    assert_eq!(sa["config"]["n_trials"], 300);
    assert_eq!(sa["points"], sb["points"]);
    assert_eq!(sa["points"][0]["eer"], sa["points"][0]["signed_gap_eer"]);
}

#[test]
fn seed_and_kappa_flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), RUN);
    let dir = tmp.path().join("o");
    let out = ftps(&[
        "run",
        "--config",
        &config,
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "9",
        "--kappa-grid",
        "1,0.5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s: Value = serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["master_seed"], 9);
    let curves = fs::read_to_string(dir.join("curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 3 * 2);
}

#[test]
fn fraction_mode_without_threshold_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let text = RUN.replace("p_error = 0.02\np_erasure = 0.01", "ray = \"pauli\"\nfractions = [0.6]");
    let config = write_config(tmp.path(), &text);
    let dir = tmp.path().join("o");
    let out = ftps(&["run", "--config", &config, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "missing_threshold");
    assert!(!dir.join("trials.jsonl").exists());
}

#[test]
fn fraction_mode_with_inline_threshold_runs_each_point() {
    let tmp = tempfile::tempdir().unwrap();
    let text = RUN
        .replace(
            "p_error = 0.02\np_erasure = 0.01",
            "ray = \"1:1\"\nfractions = [0.3, 0.6]\nthreshold = 0.03",
        )
        .replace("n_trials = 300", "n_trials = 50");
    let config = write_config(tmp.path(), &text);
    let dir = tmp.path().join("o");
    let out = ftps(&["run", "--config", &config, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("point_000/curves.csv").exists() && dir.join("point_001/trials.jsonl").exists());
    let s: Value = serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    let x = s["points"][1]["x"].as_f64().unwrap();
    assert!((x - 0.018).abs() < 1e-12);
    assert_eq!(s["points"][1]["model"]["p_erasure"].as_f64().unwrap(), x);
    assert_eq!(
        fs::read_to_string(dir.join("breakeven.csv")).unwrap().lines().count(),
        1 + 2 * 3
    );
}

#[test]
fn malformed_config_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "n_trials = \"many\"");
    let out = ftps(&["run", "--config", &config, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "config");
}

#[test]
fn calibrate_writes_threshold_files() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "seed = 1\n[calibration]\nsizes = [2, 3]\ngrid = [0.02, 0.05, 0.08]\nn_per_point = 200\n";
    let config = write_config(tmp.path(), text);
    let dir = tmp.path().join("cal");
    let out = ftps(&["calibrate", "--config", &config, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("threshold.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    let s: Value = serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["ray"], "pauli");
    assert!(s.get("threshold").is_some());
}

#[test]
fn buffer_reports_capacity_and_rounds() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("buffer.json");
    fs::write(
        &spec,
        r#"{"kappa": 0.5, "p_flush": 1e-6, "p_init": 1e-3, "p_enc": 0.0, "rounds": 2,
            "n_t": 1000000, "n_q": 100, "eps_total": 0.01}"#,
    )
    .unwrap();
    let out = ftps(&["buffer", "--config", spec.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["capacity"]["n_total"], 67);
    let p1 = r["rounds"][0]["p_out"].as_f64().unwrap();
    assert!((p1 / 3.5e-8 - 1.0).abs() < 1e-12);
    assert_eq!(r["target"]["rounds_needed"], 2);

    fs::write(&spec, r#"{"kappa": 1.5, "p_flush": 1e-6}"#).unwrap();
    let out = ftps(&["buffer", "--config", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "simulation");
}

#[test]
fn validate_reports_distances() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ftps(&["validate", "--distance", "4", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    for g in r["graphs"].as_array().unwrap() {
        assert_eq!(g["bulk_distance"], 4);
        assert_eq!(g["min_fault_weight"], 2);
    }
    assert!(tmp.path().join("primal.json").exists());
    let graph: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("dual.json")).unwrap()).unwrap();
    assert!(graph["edges"].as_array().is_some_and(|e| !e.is_empty()));
}

#[test]
fn threads_env_var_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), RUN);
    let out = Command::new(env!("CARGO_BIN_EXE_ftps"))
        .args([
            "run",
            "--config",
            &config,
            "--out",
            tmp.path().join("o").to_str().unwrap(),
        ])
        .env("FTPS_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "usage");
}
