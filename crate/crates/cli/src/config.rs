//! Run configuration: `key = value` lines grouped under `[section]` headers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Environment variable overriding the zero cache directory.
pub const CACHE_ENV: &str = "FROBRACE_CACHE_DIR";

/// Every recognized key, as `section.key`.
pub const KEYS: &[&str] = &[
    "family.name",
    "family.q",
    "family.a",
    "family.p",
    "family.d",
    "family.primes",
    "family.ell",
    "family.structure",
    "group.spec",
    "race.t",
    "race.beta",
    "race.xmax",
    "race.checkpoints",
    "race.x0",
    "zeros.source",
    "zeros.height",
    "zeros.slack",
    "model.assume",
    "model.precision",
    "model.samples",
    "model.seed",
    "run.out",
    "run.cache_dir",
    "run.workers",
];

/// Keys that never change results and are left out of the config hash.
const UNHASHED: &[&str] = &["run.out", "run.workers", "run.cache_dir"];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        let mut cfg = Config::default();
        for (section, props) in &ini {
            for (k, v) in props.iter() {
                let key = match section {
                    Some(s) => format!("{}.{}", s.trim(), k.trim()),
                    None => k.trim().to_string(),
                };
                cfg.set(&key, v.trim())?;
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("unknown config key '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Parses a value; numbers such as `1e8` are accepted for integer keys.
    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        let Some(v) = self.get(key) else { return Ok(None) };
        if let Ok(x) = v.parse::<T>() {
            return Ok(Some(x));
        }
        if let Ok(f) = v.parse::<f64>() {
            if f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f < 1.8e19 {
                if let Ok(x) = format!("{}", f as u64).parse::<T>() {
                    return Ok(Some(x));
                }
            }
        }
        Err(CliError::Config(format!("bad value '{v}' for {key}")))
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn cache_dir(&self) -> Option<PathBuf> {
        std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| self.get("run.cache_dir").map(PathBuf::from))
    }

    /// Sorted `key = value` lines of the result-relevant keys.
    pub fn canonical(&self) -> String {
        self.values
            .iter()
            .filter(|(k, _)| !UNHASHED.contains(&k.as_str()))
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// SHA-256 of the command name and the canonical form.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(self.canonical().as_bytes());
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_numbers() {
        let c = Config::parse("[family]\nname = cyclotomic\nq = 4\n\n[race]\nxmax = 1e8\n").unwrap();
        assert_eq!(c.get("family.name"), Some("cyclotomic"));
        assert_eq!(c.parsed::<u64>("race.xmax").unwrap(), Some(100_000_000));
        assert!(Config::parse("[family]\ncolour = red\n").is_err());
    }

    #[test]
    fn hash_ignores_workers() {
        let mut a = Config::default();
        a.set("family.name", "cyclotomic").unwrap();
        let mut b = a.clone();
        b.set("run.workers", "16").unwrap();
        assert_eq!(a.hash("density"), b.hash("density"));
        assert_ne!(a.hash("density"), a.hash("race"));
    }
}
