//! Parameter resolution: built-in defaults, then a flat `key = value` file,
//! then command-line flags.

use std::fs;
use std::path::Path;

use sisfront::model::RawParams;

use crate::error::CliError;

pub const KEYS: [&str; 7] = ["beta", "gamma", "sigma", "c", "epsilon", "alpha", "regime"];

/// Set one parameter from its textual value.
pub fn apply(raw: &mut RawParams, key: &str, value: &str) -> Result<(), CliError> {
    let value = value.trim().trim_matches('"');
    if key == "regime" {
        raw.regime = value.parse()?;
        return Ok(());
    }
    let x: f64 = value
        .parse()
        .map_err(|_| CliError::Validation(format!("{key}: cannot parse {value:?} as a number")))?;
    match key {
        "beta" => raw.beta = x,
        "gamma" => raw.gamma = x,
        "sigma" => raw.sigma = x,
        "c" => raw.c = x,
        "epsilon" | "eps" => raw.epsilon = x,
        "alpha" => raw.alpha = x,
        _ => return Err(CliError::Validation(format!("unknown parameter {key:?} (expected one of {KEYS:?})"))),
    }
    Ok(())
}

/// Parse `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_flat(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected key = value", n + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

pub fn load_flat(path: &Path, raw: &mut RawParams) -> Result<(), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    for (k, v) in parse_flat(&text)? {
        apply(raw, &k, &v)?;
    }
    Ok(())
}
