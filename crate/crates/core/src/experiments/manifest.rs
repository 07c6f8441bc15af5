//! Flat `key = value` run manifests.
//!
//! Lines starting with `#` are comments. Keys are unique and kept in
//! insertion order. Everything except `timestamp` is a pure function of
//! the resolved options.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(experiment: &str) -> Self {
        let mut m = RunManifest::default();
        m.set("experiment", experiment);
        m.set("tool_version", crate::VERSION);
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        assert!(!key.contains('=') && !key.contains('\n') && !value.contains('\n'));
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn set_list(&mut self, key: &str, values: &[f64]) {
        let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.set(key, joined.join(" "));
    }

    /// Records the current wall-clock time in seconds since the Unix epoch.
    pub fn stamp(&mut self) {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.set("timestamp", secs);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn experiment(&self) -> Option<&str> {
        self.get("experiment")
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::invalid(format!("manifest is missing key {key:?}")))
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| Error::invalid(format!("manifest key {key:?}: cannot parse {raw:?}")))
    }

    pub fn parse_list(&self, key: &str) -> Result<Vec<f64>> {
        self.require(key)?
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::invalid(format!("manifest key {key:?}: bad number {t:?}")))
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = RunManifest::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: "manifest".into(),
                line: i + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::Parse {
                path: path.to_path_buf(),
                line,
                msg,
            },
            e => e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut m = RunManifest::new("bench-normal");
        m.set("n", 10000);
        m.set_list("sigmas", &[0.5, 1.0, 2.0]);
        m.set("n", 20000);
        let back = RunManifest::parse(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.parse_value::<usize>("n").unwrap(), 20000);
        assert_eq!(back.parse_list("sigmas").unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(back.require("missing").is_err());
        assert!(RunManifest::parse("no equals sign").is_err());
    }
}
