//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Values are parsed lazily by the
//! consumer, and every key must be consumed: leftovers are reported as
//! configuration errors so that typos do not silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", idx + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", idx + 1)));
            }
            if entries
                .insert(key.to_string(), (idx + 1, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", idx + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Removes and parses `key` as a float.
    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {line}: `{key}` expects a number, got `{v}`"))),
        }
    }

    pub fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {line}: `{key}` expects an integer, got `{v}`"))),
        }
    }

    pub fn take_string(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    /// Comma-separated list of floats.
    pub fn take_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => parse_f64_list(&v)
                .map(Some)
                .map_err(|e| Error::Config(format!("line {line}: `{key}`: {e}"))),
        }
    }

    /// Fails if any key was left unconsumed.
    pub fn finish(self) -> Result<()> {
        if self.entries.is_empty() {
            return Ok(());
        }
        let keys: Vec<String> = self
            .entries
            .iter()
            .map(|(k, (line, _))| format!("`{k}` (line {line})"))
            .collect();
        Err(Error::Config(format!("unknown keys: {}", keys.join(", "))))
    }
}

pub fn parse_f64_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let mut kv = KeyValues::parse("# header\n gamma = 2e7 # trailing\n\nkappa=1\n").unwrap();
        assert_eq!(kv.take_f64("gamma").unwrap(), Some(2e7));
        assert_eq!(kv.take_f64("kappa").unwrap(), Some(1.0));
        assert_eq!(kv.take_f64("missing").unwrap(), None);
        kv.finish().unwrap();
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(KeyValues::parse("a = 1\na = 2").is_err());
        assert!(KeyValues::parse("just words").is_err());
        let mut kv = KeyValues::parse("a = x").unwrap();
        assert!(kv.take_f64("a").is_err());
    }

    #[test]
    fn leftover_keys_are_errors() {
        let kv = KeyValues::parse("gamam = 1").unwrap();
        let err = kv.finish().unwrap_err();
        assert!(err.to_string().contains("gamam"));
    }

    #[test]
    fn float_lists() {
        assert_eq!(parse_f64_list("0, 1e-4,4e-4").unwrap(), vec![0.0, 1e-4, 4e-4]);
        assert!(parse_f64_list("1,a").is_err());
    }
}
