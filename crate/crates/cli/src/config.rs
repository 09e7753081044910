//! `key = value` configuration files for `generate`.

use std::collections::BTreeMap;

use thiserror::Error;

/// Keys accepted in a config file; each mirrors the `generate` flag of the same name.
pub const KEYS: [&str; 13] = [
    "count",
    "seed",
    "public-seed",
    "public-file",
    "epsilon",
    "delta",
    "check-rate",
    "threshold",
    "source",
    "format",
    "out",
    "report",
    "jobs",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
}

/// Parses config text. Blank lines and `#` comments are skipped; underscores in
/// keys are read as dashes.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let (k, v) = l.split_once('=').ok_or(ConfigError::Syntax(line))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax(line));
        }
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line, key: k.trim().to_string() });
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(ConfigError::Duplicate { line, key });
        }
    }
    Ok(map)
}
