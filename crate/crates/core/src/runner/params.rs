//! Typed access to the `[params]` table with line/field diagnostics.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use toml::Value;

use super::{Result, RunError};

/// Line of `key = ...` in `text`, inside `[section]` when given, otherwise
/// before the first section header.
pub(crate) fn line_of(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut in_section = section.is_none();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            in_section = section.is_some_and(|s| line.trim_start_matches('[').trim_end_matches(']').trim() == s);
            continue;
        }
        if !in_section {
            continue;
        }
        if let Some(rest) = line.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(idx + 1);
            }
        }
    }
    None
}

pub(crate) struct Params<'a> {
    table: &'a toml::Table,
    source: &'a str,
    base_dir: &'a Path,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Params<'a> {
    pub fn new(table: &'a toml::Table, source: &'a str, base_dir: &'a Path) -> Self {
        Self {
            table,
            source,
            base_dir,
            used: RefCell::default(),
        }
    }

    pub fn err(&self, key: &str, msg: impl Into<String>) -> RunError {
        RunError::Config {
            line: line_of(self.source, Some("params"), key),
            field: Some(format!("params.{key}")),
            msg: msg.into(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&'a Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.table.get(key)
    }

    fn number(&self, key: &str, v: &Value) -> Result<f64> {
        match v {
            Value::Float(f) if f.is_finite() => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(self.err(key, "expected a finite number")),
        }
    }

    fn count(&self, key: &str, v: &Value) -> Result<usize> {
        match v {
            Value::Integer(i) if *i >= 0 => Ok(*i as usize),
            _ => Err(self.err(key, "expected a nonnegative integer")),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.get(key).map_or(Ok(default), |v| self.number(key, v))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| self.number(key, v)).transpose()
    }

    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.f64_or(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(key, format!("must be positive, got {v}")))
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        self.get(key).map_or(Ok(default), |v| self.count(key, v))
    }

    /// Integer at least `min`.
    pub fn usize_min(&self, key: &str, default: usize, min: usize) -> Result<usize> {
        let v = self.usize_or(key, default)?;
        if v < min {
            return Err(self.err(key, format!("must be at least {min}, got {v}")));
        }
        Ok(v)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(self.err(key, "expected true or false")),
        }
    }

    pub fn str_or(&self, key: &str, default: &str) -> Result<String> {
        match self.get(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(self.err(key, "expected a string")),
        }
    }

    /// String restricted to `choices`.
    pub fn choice(&self, key: &str, default: &str, choices: &[&str]) -> Result<String> {
        let s = self.str_or(key, default)?;
        if choices.contains(&s.as_str()) {
            Ok(s)
        } else {
            Err(self.err(key, format!("`{s}` is not one of {}", choices.join(", "))))
        }
    }

    fn array(&self, key: &str) -> Result<Option<&'a Vec<Value>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) if !a.is_empty() => Ok(Some(a)),
            Some(_) => Err(self.err(key, "expected a nonempty array")),
        }
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.array(key)? {
            None => Ok(default.to_vec()),
            Some(a) => a.iter().map(|v| self.count(key, v)).collect(),
        }
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.array(key)? {
            None => Ok(default.to_vec()),
            Some(a) => a.iter().map(|v| self.number(key, v)).collect(),
        }
    }

    /// Array of integer arrays, such as itineraries.
    pub fn nested_usize_list(&self, key: &str) -> Result<Option<Vec<Vec<usize>>>> {
        let Some(a) = self.array(key)? else { return Ok(None) };
        a.iter()
            .map(|row| match row {
                Value::Array(r) => r.iter().map(|v| self.count(key, v)).collect(),
                _ => Err(self.err(key, "expected an array of integer arrays")),
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Array of number arrays of length `width`.
    pub fn nested_f64_list(&self, key: &str, width: usize) -> Result<Option<Vec<Vec<f64>>>> {
        let Some(a) = self.array(key)? else { return Ok(None) };
        a.iter()
            .map(|row| match row {
                Value::Array(r) if r.len() == width => r.iter().map(|v| self.number(key, v)).collect(),
                _ => Err(self.err(key, format!("expected arrays of {width} numbers"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) if !s.is_empty() => Ok(Some(self.base_dir.join(s))),
            Some(_) => Err(self.err(key, "expected a nonempty path string")),
        }
    }

    /// Rejects keys that were never looked up.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.table.keys().find(|k| !used.contains(k.as_str())) {
            Some(k) => Err(self.err(k, format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> toml::Table {
        text.parse::<toml::Table>().unwrap()["params"].as_table().unwrap().clone()
    }

    #[test]
    fn finds_lines_in_sections() {
        let text = "delta = 1\n[params]\n  delta = 2\nns=[1]\n";
        assert_eq!(line_of(text, None, "delta"), Some(1));
        assert_eq!(line_of(text, Some("params"), "delta"), Some(3));
        assert_eq!(line_of(text, Some("params"), "ns"), Some(4));
        assert_eq!(line_of(text, Some("params"), "nsx"), None);
    }

    #[test]
    fn typed_access_and_unknown_keys() {
        let text = "[params]\ndelta = 2\nns = [27, 81]\nmap = \"baker\"\nextra = 1\n";
        let t = table(text);
        let p = Params::new(&t, text, Path::new("."));
        assert_eq!(p.f64_or("delta", 1.0).unwrap(), 2.0);
        assert_eq!(p.usize_list_or("ns", &[]).unwrap(), vec![27, 81]);
        assert_eq!(p.choice("map", "x", &["baker"]).unwrap(), "baker");
        assert_eq!(p.f64_or("missing", 4.0).unwrap(), 4.0);
        match p.finish().unwrap_err() {
            RunError::Config { line, field, .. } => {
                assert_eq!(line, Some(5));
                assert_eq!(field.as_deref(), Some("params.extra"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn type_errors_carry_field() {
        let text = "[params]\ndelta = \"one\"\nns = []\n";
        let t = table(text);
        let p = Params::new(&t, text, Path::new("."));
        assert!(p.f64_or("delta", 1.0).unwrap_err().to_string().contains("line 2"));
        assert!(p.usize_list_or("ns", &[1]).is_err());
        assert!(p.positive_or("neg", -1.0).is_err());
    }
}
