use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mechdelin"));
    for var in ["MECHDELIN_SEED", "MECHDELIN_WORKERS", "MECHDELIN_OUT", "MECHDELIN_FORMAT"] {
        c.env_remove(var);
    }
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn data(name: &str) -> String {
    configs().join("data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn tariff_partition_of_four_units() {
    let v = json_of(&run(&["partition", "--class", "two_part_tariff", "--profile", &data("fig1.json"), "--lo", "0,0", "--hi", "13,13"]));
    let s = &v["summary"];
    assert_eq!(s["hyperplanes_emitted"], 10);
    let sigs: BTreeSet<&str> = s["demand_signatures"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(sigs, ["0", "1", "2", "3", "4"].into_iter().collect());
    assert_eq!(v["rows"].as_array().unwrap().len() as u64, s["cells"].as_u64().unwrap());
}

#[test]
fn bound_matches_formula() {
    let v = json_of(&run(&["bound", "--U", "1", "--d", "2", "--t", "10", "--N", "10000", "--delta", "0.05"]));
    let pdim = 9.0 * 2.0 * (4.0f64 * 2.0 * 10.0).log2();
    let eps = (pdim / 10000.0).sqrt() + ((1.0f64 / 0.05).ln() / 10000.0).sqrt();
    let got = v["summary"]["epsilon"].as_f64().unwrap();
    assert!((got - eps).abs() < 1e-11, "{got} vs {eps}");
    assert!((got - 0.1240).abs() < 5e-5);
}

#[test]
fn invalid_distribution_exits_2_naming_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"atoms":[{"profile":[{"kind":"additive","values":[1]}],"prob":"abc"}]}"#).unwrap();
    let out = run(&["sample", "--dist", path.to_str().unwrap(), "--N", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("atoms[0].prob"));
}

#[test]
fn zero_samples_exit_2_and_grid_limit_exits_3() {
    assert_eq!(run(&["bound", "--U", "1", "--d", "2", "--t", "10", "--N", "0"]).status.code(), Some(2));
    let out = run(&["erm", "--class", "two_part_tariff", "--samples", &data("tariff_samples.json"), "--method", "grid", "--resolution", "0.0001"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn csv_rows_reproduce_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, workers) in ["1", "1", "3"].iter().enumerate() {
        let prefix = dir.path().join(format!("gap{k}"));
        let args = ["--seed", "42", "--workers", workers, "--out", prefix.to_str().unwrap()];
        let out = run(&[&args[..], &["gap", "--class", "two_part_tariff", "--dist", &data("tariff_dist.json"), "--N", "20", "--trials", "12"]].concat());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(prefix.with_extension("csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    assert_eq!(String::from_utf8_lossy(&outputs[0]).lines().count(), 13);
}

#[test]
fn seed_from_environment() {
    let gap = ["gap", "--class", "two_part_tariff", "--dist", &data("tariff_dist.json"), "--N", "10", "--trials", "3", "--format", "csv"];
    let by_flag = run(&[&["--seed", "9"][..], &gap[..]].concat());
    let by_env = bin().env("MECHDELIN_SEED", "9").args(gap).output().unwrap();
    let other = run(&[&["--seed", "10"][..], &gap[..]].concat());
    assert_eq!(by_flag.stdout, by_env.stdout);
    assert_ne!(by_flag.stdout, other.stdout);
}

#[test]
fn spm_markdown_has_one_row_per_level() {
    let out = run(&[
        "spm",
        "--hierarchy",
        &data("group_hierarchy.json"),
        "--samples",
        &data("two_group_2000.json"),
        "--U",
        "10",
        "--format",
        "md",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2 + 4);
    assert!(lines[0].starts_with("| level |"));
    let selected: Vec<&&str> = lines[2..].iter().filter(|l| l.trim_end().ends_with("| true |")).collect();
    assert_eq!(selected.len(), 1);
    assert!(selected[0].starts_with("| 2 |"));
}

#[test]
fn config_run_matches_direct_invocation() {
    let direct = json_of(&run(&["partition", "--class", "two_part_tariff", "--profile", &data("fig1.json"), "--lo", "0,0", "--hi", "13,13", "--verify-trials", "20"]));
    let via = json_of(&run(&["run", "--config", configs().join("fig1.json").to_str().unwrap()]));
    assert_eq!(direct["rows"], via["rows"]);
    assert_eq!(direct["config_hash"], via["config_hash"]);
    assert_eq!(via["summary"]["all_affine"], true);
}

#[test]
fn batch_config_writes_numbered_records() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("c04");
    let out = run(&["--out", prefix.to_str().unwrap(), "run", "--config", configs().join("c04_shattering.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for k in 0..6 {
        let text = std::fs::read_to_string(dir.path().join(format!("c04.{k}.json"))).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["summary"]["shattered"], true);
        assert!(dir.path().join(format!("c04.{k}.csv")).exists());
    }
}

#[test]
fn nested_run_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nest.json");
    std::fs::write(&path, r#"{"command":"run","args":{"config":"nest.json"}}"#).unwrap();
    assert_eq!(run(&["run", "--config", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn every_shipped_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut names: Vec<PathBuf> = std::fs::read_dir(configs())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    names.sort();
    assert_eq!(names.len(), 12);
    for path in names {
        let prefix = dir.path().join(path.file_stem().unwrap());
        let out = run(&["--out", prefix.to_str().unwrap(), "run", "--config", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}
