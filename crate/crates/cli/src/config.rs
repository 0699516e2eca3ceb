//! `key = value` configuration files and flag/file/default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::usage(format!(
                "config line {}: expected key = value, got '{line}'",
                i + 1
            )));
        };
        out.insert(normalize(k), v.trim().to_string());
    }
    Ok(out)
}

/// Resolves settings with precedence flag > config file > default and keeps
/// a snapshot of every resolved value for the run manifest.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    snapshot: BTreeMap<String, Value>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::usage(format!("cannot read config file {}: {e}", p.display()))
                })?;
                parse_kv(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Settings {
            file,
            snapshot: BTreeMap::new(),
        })
    }

    fn from_file<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.file.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::usage(format!("config key '{key}': {e}"))),
            None => Ok(None),
        }
    }

    /// Optional setting without a default.
    pub fn opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Serialize + Clone,
        T::Err: Display,
    {
        let key = normalize(key);
        let value = match flag {
            Some(v) => Some(v),
            None => self.from_file(&key)?,
        };
        if let Some(v) = &value {
            self.snapshot.insert(key, serde_json::to_value(v).unwrap_or(Value::Null));
        }
        Ok(value)
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Serialize + Clone,
        T::Err: Display,
    {
        let value = self.opt(key, flag)?.unwrap_or(default);
        self.snapshot.insert(normalize(key), serde_json::to_value(&value).unwrap_or(Value::Null));
        Ok(value)
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + Serialize + Clone,
        T::Err: Display,
    {
        self.opt(key, flag)?.ok_or_else(|| {
            CliError::usage(format!("missing required setting --{}", key.replace('_', "-")))
        })
    }

    pub fn snapshot(&self) -> &BTreeMap<String, Value> {
        &self.snapshot
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let mut s = Settings {
            file: parse_kv("restarts = 3\n# comment\nseed=9 # trailing\n").unwrap(),
            snapshot: BTreeMap::new(),
        };
        assert_eq!(s.get("restarts", Some(7usize), 5).unwrap(), 7);
        assert_eq!(s.get("seed", None::<u64>, 0).unwrap(), 9);
        assert_eq!(s.get("max-iterations", None::<usize>, 500).unwrap(), 500);
        assert_eq!(s.snapshot()["max_iterations"], 500);
    }

    #[test]
    fn bad_lines_and_values() {
        assert!(parse_kv("just words").is_err());
        let mut s = Settings {
            file: parse_kv("restarts = many").unwrap(),
            snapshot: BTreeMap::new(),
        };
        assert!(s.get("restarts", None::<usize>, 5).is_err());
    }
}
