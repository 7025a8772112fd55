//! `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Recognised keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `n`, `p`, `a`, `mu`, `mode` | physical parameters |
//! | `mu_list` | comma separated, for sweeps |
//! | `k`, `l_max`, `harmonics` (`odd`/`all`), `decay_budget`, `samples` | discretisation |
//! | `profile_tol`, `dnls_tol`, `kernel_tol`, `range_tol`, `range_max_iter` | solver tolerances |
//! | `hessian` (`true`/`false`) | Hessian diagnostics |
//! | `steps`, `periods`, `drift_bound` | leapfrog validation |
//! | `out` | output directory |
//!
//! Command line flags override the file, which overrides the built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const KEYS: &[&str] = &[
    "n",
    "p",
    "a",
    "mu",
    "mode",
    "mu_list",
    "k",
    "l_max",
    "harmonics",
    "decay_budget",
    "samples",
    "profile_tol",
    "dnls_tol",
    "kernel_tol",
    "range_tol",
    "range_max_iter",
    "hessian",
    "steps",
    "periods",
    "drift_bound",
    "out",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("config line {}: expected key = value", no + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(Error::Format(format!("config line {}: unknown key '{k}'", no + 1)));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Format(format!("config line {}: duplicate key '{k}'", no + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Format(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }

    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some),
        }
    }

    /// `flag`, else the file entry, else `None`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    /// Like [`pick`](Self::pick) with a default.
    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

/// Parses `0.2, 0.1,0.05`.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("cannot parse '{x}' as a number")))
        })
        .collect()
}
