//! Flat `key = value` configuration: one key per line, `#` starts a comment.
//! Later entries (e.g. command-line flags) override earlier ones.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::grid::TimeGrid;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return invalid(format!("line {}: expected key = value, got '{line}'", no + 1));
            };
            let key = k.trim();
            if key.is_empty() {
                return invalid(format!("line {}: empty key", no + 1));
            }
            cfg.set(key, v.trim());
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn merge(&mut self, other: &Config) {
        for (k, v) in &other.entries {
            self.set(k, v);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Fails on the first key not in `allowed`, naming it.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => invalid(format!("unknown key '{k}'")),
            None => Ok(()),
        }
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Invalid(format!("key '{key}': cannot parse '{v}'"))),
        }
    }

    pub fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?
            .ok_or_else(|| Error::Invalid(format!("missing required key '{key}'")))
    }

    /// `key = a,b,c` as a list of floats.
    pub fn list_f64(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|_| Error::Invalid(format!("key '{key}': cannot parse '{s}'"))))
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    /// Canonical text form, sorted by key.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// `uniform` or `graded:<r>`.
pub fn parse_grid(spec: &str, t_end: f64, n: usize) -> Result<TimeGrid> {
    let spec = spec.trim();
    if spec == "uniform" {
        return TimeGrid::uniform(t_end, n);
    }
    if let Some(r) = spec.strip_prefix("graded:") {
        let r: f64 = r
            .parse()
            .map_err(|_| Error::Invalid(format!("key 'grid': cannot parse grading exponent '{r}'")))?;
        return TimeGrid::graded(t_end, n, r);
    }
    invalid(format!("key 'grid': expected uniform or graded:<r>, got '{spec}'"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_comments_and_overrides() {
        let mut c = Config::parse("# header\nalpha = 0.75  # order\nN=64\n\n").unwrap();
        assert_eq!(c.required::<f64>("alpha").unwrap(), 0.75);
        let mut flags = Config::new();
        flags.set("N", "128");
        c.merge(&flags);
        assert_eq!(c.required::<usize>("N").unwrap(), 128);
        assert_eq!(c.or("T", 1.0).unwrap(), 1.0);
        assert!(Config::parse("novalue").is_err());
    }

    #[test]
    fn unknown_keys_are_named() {
        let c = Config::parse("alpha=1\nbogus=2").unwrap();
        let e = c.check_keys(&["alpha"]).unwrap_err();
        assert!(e.to_string().contains("bogus"));
    }

    #[test]
    fn bad_values_name_the_key() {
        let c = Config::parse("N = many").unwrap();
        let e = c.required::<usize>("N").unwrap_err();
        assert!(e.to_string().contains("'N'"));
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("uniform", 1.0, 4).unwrap(), TimeGrid::uniform(1.0, 4).unwrap());
        assert_eq!(parse_grid("graded:2", 1.0, 4).unwrap(), TimeGrid::graded(1.0, 4, 2.0).unwrap());
        assert!(parse_grid("graded:x", 1.0, 4).is_err());
        assert!(parse_grid("chebyshev", 1.0, 4).is_err());
    }

    #[test]
    fn float_lists() {
        let c = Config::parse("lambdas = 1, 2 ,4").unwrap();
        assert_eq!(c.list_f64("lambdas").unwrap().unwrap(), vec![1.0, 2.0, 4.0]);
    }
}
