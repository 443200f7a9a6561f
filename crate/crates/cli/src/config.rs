//! Resolution of run parameters from flags, an optional `key=value` file and
//! built-in defaults, in that order of precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Comma-separated list argument.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().is_empty() {
            return Ok(List(Vec::new()));
        }
        s.split(',')
            .map(|part| part.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", part.trim())))
            .collect::<Result<Vec<_>, _>>()
            .map(List)
    }
}

impl<T: Serialize> Serialize for List<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// Parses flat `key = value` lines. `#` starts a comment; keys may use `-` or
/// `_` interchangeably and are stored with `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value, got `{raw}`", no + 1)))?;
        let key = key.trim().replace('-', "_");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", no + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config key `{key}` given twice")));
        }
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Merges flag values with file values and records every resolved value.
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: Map<String, Value>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self { file, resolved: Map::new() }
    }

    fn take_file_value<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.file.remove(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: invalid value `{raw}`: {e}"))),
        }
    }

    /// Flag, else file, else `default`; `None` only when all three are absent.
    pub fn opt<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Serialize,
        T::Err: fmt::Display,
    {
        let from_file = self.take_file_value::<T>(key)?;
        let value = flag.or(from_file).or(default);
        if let Some(v) = &value {
            let json = serde_json::to_value(v).map_err(|e| CliError::Usage(e.to_string()))?;
            self.resolved.insert(key.to_string(), json);
        }
        Ok(value)
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Serialize,
        T::Err: fmt::Display,
    {
        Ok(self.opt(key, flag, Some(default))?.expect("default supplied"))
    }

    /// Boolean switches: present flag wins, then the file, then `false`.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        self.get(key, flag.then_some(true), false)
    }

    /// Records a derived value in the echoed configuration.
    pub fn note(&mut self, key: &str, value: Value) {
        self.resolved.insert(key.to_string(), value);
    }

    /// Fails on keys that no parameter consumed; returns the resolved config.
    pub fn finish(self) -> Result<Map<String, Value>, CliError> {
        if !self.file.is_empty() {
            let keys: Vec<&str> = self.file.keys().map(String::as_str).collect();
            return Err(CliError::Usage(format!("unknown config key(s): {}", keys.join(", "))));
        }
        Ok(self.resolved)
    }
}
