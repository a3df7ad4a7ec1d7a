//! Flat `key = value` configuration files. Every key names a command-line
//! flag (without the leading dashes); a flag given on the command line wins.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

const KNOWN_KEYS: &[&str] = &[
    "data",
    "domain",
    "order",
    "knots-m",
    "eps",
    "max-iter",
    "grid",
    "out",
    "n",
    "tau",
    "seed",
    "reps",
    "rate",
    "censor-lo",
    "censor-hi",
    "knots",
    "lower",
    "upper",
];

#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value", k + 1);
            };
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key '{key}'", k + 1);
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// `cli` if given, else the parsed config value, else `None`.
    pub fn pick<T>(&self, key: &str, cli: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key '{key}' = '{raw}': {e}")),
        }
    }

    pub fn require<T>(&self, key: &str, cli: Option<T>) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.pick(key, cli)?
            .with_context(|| format!("missing --{key} (flag or config key)"))
    }
}
