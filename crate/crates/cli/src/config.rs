//! `key = value` configuration files whose keys mirror the long flag names.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Blank lines and lines starting with `#` are ignored. Keys may use `_`
    /// or `-` and may carry a leading `--`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Spec(format!(
                    "config line {}: expected `key = value`",
                    k + 1
                )));
            };
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            if key.is_empty() {
                return Err(CliError::Spec(format!("config line {}: empty key", k + 1)));
            }
            if entries
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::Spec(format!(
                    "config line {}: duplicate key `{key}`",
                    k + 1
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The flag value if given, else the parsed config entry. Consumes the
    /// entry either way.
    pub fn merge<T: FromStr>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let entry = self.entries.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        entry
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Spec(format!("config `{key}`: {e}")))
            })
            .transpose()
    }

    /// Fails on entries no flag consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.keys().next() {
            Some(k) => Err(CliError::Spec(format!("unknown config key `{k}`"))),
            None => Ok(()),
        }
    }
}
