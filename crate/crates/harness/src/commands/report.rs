//! `report`: one text line per JSON artifact found in an output
//! directory, with a config-hash check against the given config.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::config::Config;
use crate::error::{HarnessError, Result};

const ARTIFACTS: &[&str] = &["run.json", "sweep.json", "gauge.json", "averaging.json"];

/// Prints a summary of each known artifact in `out_dir` to `out`.
/// Returns how many artifacts were found.
pub fn run(config: &Config, out_dir: &Path, out: &mut impl Write) -> Result<usize> {
    if !out_dir.is_dir() {
        return Err(HarnessError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} is not a directory", out_dir.display()),
        )));
    }
    let expected_hash = config.content_hash();
    let mut found = 0;
    for name in ARTIFACTS {
        let path = out_dir.join(name);
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
            Err(e) => return Err(e.into()),
        };
        let value: Value = serde_json::from_str(&text).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("{}: {e}", path.display()),
            )
        })?;
        found += 1;
        writeln!(out, "{}", summarize(name, &value, &expected_hash))?;
    }
    if found == 0 {
        writeln!(out, "no artifacts in {}", out_dir.display())?;
    }
    Ok(found)
}

fn summarize(name: &str, value: &Value, expected_hash: &str) -> String {
    let command = value
        .get("command")
        .and_then(Value::as_str)
        .unwrap_or("unknown");
    let hash_state = match value.get("config_hash").and_then(Value::as_str) {
        Some(h) if h == expected_hash => "match",
        Some(_) => "MISMATCH",
        None => "absent",
    };
    let mut line = format!("{name}: command={command}");
    let mut push_num = |label: &str, key: &str| {
        if let Some(x) = value.get(key).and_then(Value::as_f64) {
            line.push_str(&format!(" {label}={x}"));
        }
    };
    push_num("final_time", "final_time");
    push_num("mass_drift", "mass_drift");
    push_num("max_deviation", "max_deviation");
    push_num("slope", "slope");
    push_num("max_scaled_residual", "max_scaled_residual");
    if let Some(snapshots) = value.get("snapshots").and_then(Value::as_array) {
        line.push_str(&format!(" snapshots={}", snapshots.len()));
    }
    if let Some(omegas) = value.get("omegas").and_then(Value::as_array) {
        line.push_str(&format!(" omegas={}", omegas.len()));
    }
    if let Some(diverged) = value.get("diverged").and_then(Value::as_array) {
        let n = diverged.iter().filter(|v| v.as_bool() == Some(true)).count();
        if n > 0 {
            line.push_str(&format!(" diverged={n}"));
        }
    }
    line.push_str(&format!(" config={hash_state}"));
    line
}
