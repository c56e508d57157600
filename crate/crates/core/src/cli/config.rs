//! Flat `key = value` configuration files.
//!
//! Keys are long flag names without the leading dashes. Blank lines and lines
//! starting with `#` are ignored. Values from the file are appended to the
//! command line only for flags the command line does not already carry, so
//! flags take precedence over the file and the file over built-in defaults.

use std::path::Path;

use crate::error::{Error, Result};

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected key=value, got {line:?}", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') || k.contains(char::is_whitespace) {
            return Err(Error::Usage(format!("config line {}: bad key {k:?}", i + 1)));
        }
        if k == "config" {
            return Err(Error::Usage(format!("config line {}: nested config files are not supported", i + 1)));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(Error::Usage(format!("config line {}: duplicate key {k:?}", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn has_flag(argv: &[String], key: &str) -> bool {
    let long = format!("--{key}");
    let with_eq = format!("--{key}=");
    argv.iter().any(|a| *a == long || a.starts_with(&with_eq))
}

/// `argv` followed by `--key=value` for every config entry not already given.
/// Boolean entries (`true`/`false`) become a bare flag or are dropped.
pub fn merge_config(argv: &[String], entries: &[(String, String)]) -> Vec<String> {
    let mut out = argv.to_vec();
    for (k, v) in entries {
        if has_flag(argv, k) {
            continue;
        }
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => out.push(format!("--{k}={v}")),
        }
    }
    out
}

/// Value of `--config` in `argv`, if any.
pub fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}
