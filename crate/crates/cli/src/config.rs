//! Flat `key = value` settings with command-line overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Raw settings for one command plus the values it actually resolved.
#[derive(Debug, Default)]
pub struct Settings {
    raw: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
    seen: BTreeSet<String>,
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; a repeated key is an error.
pub fn parse_flat(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", n + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", n + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("config line {}: duplicate key {k}", n + 1)));
        }
    }
    Ok(out)
}

impl Settings {
    /// File values (if any) overlaid with `overrides`.
    pub fn load(file: Option<&Path>, overrides: Vec<(String, String)>) -> Result<Self, CliError> {
        let mut raw = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                parse_flat(&text)?
            }
            None => BTreeMap::new(),
        };
        raw.extend(overrides);
        Ok(Settings { raw, ..Default::default() })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.seen.insert(key.to_string());
        self.raw.get(key).cloned()
    }

    fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    fn parse<T: FromStr>(key: &str, text: &str) -> Result<T, CliError> {
        text.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {text:?}")))
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        let v = match self.take(key) {
            Some(text) => Self::parse(key, &text)?,
            None => default,
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn require<T: FromStr + Display>(&mut self, key: &str) -> Result<T, CliError> {
        let text = self.take(key).ok_or_else(|| CliError::Config(format!("{key}: required but not set")))?;
        let v = Self::parse(key, &text)?;
        self.record(key, &v);
        Ok(v)
    }

    pub fn optional<T: FromStr + Display>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.take(key) {
            Some(text) => {
                let v = Self::parse(key, &text)?;
                self.record(key, &v);
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }

    /// Comma-separated list.
    pub fn list<T: FromStr + Display>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>, CliError> {
        let v = match self.take(key) {
            Some(text) => text
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| Self::parse(key, s))
                .collect::<Result<Vec<T>, _>>()?,
            None => default,
        };
        let shown: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        self.record(key, shown.join(","));
        Ok(v)
    }

    pub fn optional_list<T: FromStr + Display>(&mut self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        if self.raw.contains_key(key) {
            self.list(key, Vec::new()).map(Some)
        } else {
            self.seen.insert(key.to_string());
            Ok(None)
        }
    }

    /// Fails with the first key that no getter asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        match self.raw.keys().find(|k| !self.seen.contains(*k)) {
            Some(k) => Err(CliError::Config(format!("{k}: unknown key for this command"))),
            None => Ok(()),
        }
    }

    /// Resolved settings in `key = value` form, sorted by key.
    pub fn snapshot(&self) -> String {
        self.resolved.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

pub fn invalid(key: &str, msg: impl Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}
