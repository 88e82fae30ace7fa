//! `key=value` config files. Keys are the long flag names without the leading
//! dashes; entries are turned into flags placed ahead of the command-line ones,
//! so explicit flags win.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{HarnessError, Result};

/// Keys that take a value.
pub const VALUE_KEYS: &[&str] = &[
    "dataset",
    "synthetic",
    "n-features",
    "objective",
    "lambda",
    "test",
    "theta",
    "nu",
    "r",
    "omega",
    "gamma",
    "s0",
    "alpha",
    "l0",
    "eta",
    "max-epochs",
    "tol",
    "seed",
    "out",
    "rstar-tol",
    "trace-diagnostics-every",
    "iterates",
];

/// Switches; the value must be `true` or `false`.
pub const SWITCH_KEYS: &[&str] = &["line-search", "plots", "save-iterates"];

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| HarnessError::Usage(format!("config line {}: {msg}", i + 1));
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        if !VALUE_KEYS.contains(&k) && !SWITCH_KEYS.contains(&k) {
            return Err(bad(format!("unknown key {k:?}")));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(bad(format!("duplicate key {k:?}")));
        }
        if SWITCH_KEYS.contains(&k) && v != "true" && v != "false" {
            return Err(bad(format!("{k} must be true or false")));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Converts config entries into command-line flags.
pub fn to_flags(entries: &[(String, String)]) -> Vec<OsString> {
    let mut flags = Vec::new();
    for (k, v) in entries {
        if SWITCH_KEYS.contains(&k.as_str()) {
            if v == "true" {
                flags.push(format!("--{k}").into());
            }
        } else {
            flags.push(format!("--{k}").into());
            flags.push(v.into());
        }
    }
    flags
}

/// Finds the value of `--config` in raw arguments.
pub fn find_config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

pub fn load_config_flags(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(to_flags(&parse_config(&text)?))
}
