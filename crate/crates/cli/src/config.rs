//! `run --config FILE`: JSON configs turned back into command lines.
//!
//! A config is either one run, `{"command": "bound", "seed": 1, "args": {...}}`,
//! or a batch, `{"seed": 1, "out": "results/c10", "runs": [{...}, ...]}`.
//! Argument keys use the long flag names with `_` or `-`; `true` becomes a bare flag
//! and arrays are comma joined. Relative paths resolve against the config's directory.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::Value;

use crate::report::RunRecord;
use crate::{Cli, RunArgs};
use mechdelin::Error;

const PATH_KEYS: &[&str] = &["profile", "samples", "dist", "hierarchy", "class_file", "write"];

fn bad(msg: String) -> anyhow::Error {
    Error::Domain(msg).into()
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn flag(key: &str) -> String {
    match key {
        "U" | "N" => format!("--{key}"),
        _ => format!("--{}", key.replace('_', "-")),
    }
}

/// Command line for one run entry.
fn argv(entry: &Value, default_seed: u64, dir: &Path) -> Result<Vec<String>> {
    let obj = entry.as_object().ok_or_else(|| bad("config: each run must be an object".into()))?;
    let command = obj.get("command").and_then(Value::as_str).ok_or_else(|| bad("config: run is missing \"command\"".into()))?;
    if command == "run" {
        return Err(bad("config: a run cannot invoke \"run\"".into()));
    }
    let seed = match obj.get("seed") {
        None => default_seed,
        Some(v) => v.as_u64().ok_or_else(|| bad(format!("config: seed must be a non-negative integer, got {v}")))?,
    };
    let mut out = vec!["mechdelin".to_string(), "--seed".into(), seed.to_string(), command.to_string()];
    let empty = serde_json::Map::new();
    let args = match obj.get("args") {
        None => &empty,
        Some(Value::Object(a)) => a,
        Some(_) => return Err(bad("config: \"args\" must be an object".into())),
    };
    for (key, value) in args {
        let is_path = PATH_KEYS.contains(&key.replace('-', "_").as_str());
        let text = match value {
            Value::Bool(true) => {
                out.push(flag(key));
                continue;
            }
            Value::Bool(false) | Value::Null => continue,
            Value::Array(items) => {
                let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
                parts.ok_or_else(|| bad(format!("config: {key}: arrays may only hold scalars")))?.join(",")
            }
            Value::Object(_) => return Err(bad(format!("config: {key}: nested objects are not arguments"))),
            other => scalar(other).expect("scalar"),
        };
        let weights_file = key == "weights" && text.ends_with(".json");
        let text = if (is_path || weights_file) && Path::new(&text).is_relative() {
            dir.join(&text).to_string_lossy().into_owned()
        } else {
            text
        };
        out.push(flag(key));
        out.push(text);
    }
    Ok(out)
}

pub fn run(args: &RunArgs, cli: &Cli) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| bad(format!("{}: {e}", args.config.display())))?;
    let config: Value = serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", args.config.display())))?;
    let dir = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let seed = match config.get("seed") {
        None => cli.seed,
        Some(v) => v.as_u64().ok_or_else(|| bad(format!("config: seed must be a non-negative integer, got {v}")))?,
    };
    let runs: Vec<&Value> = match config.get("runs") {
        Some(Value::Array(rs)) => rs.iter().collect(),
        Some(_) => return Err(bad("config: \"runs\" must be an array".into())),
        None => vec![&config],
    };
    let mut records = Vec::new();
    for (k, entry) in runs.iter().enumerate() {
        let line = argv(entry, seed, &dir)?;
        let sub = Cli::try_parse_from(&line).map_err(|e| bad(format!("config run {k}: {}", e.to_string().trim())))?;
        records.extend(crate::execute(&sub).with_context(|| format!("config run {k} ({})", line[3]))?);
    }
    if cli.out.is_none() {
        if let Some(prefix) = config.get("out").and_then(Value::as_str) {
            let prefix: PathBuf = if Path::new(prefix).is_relative() { dir.join(prefix) } else { prefix.into() };
            crate::emit(&records, Some(&prefix), cli.format)?;
            return Ok(Vec::new());
        }
    }
    Ok(records)
}
