//! Flat `key = value` configuration files.
//!
//! ```text
//! # reference run
//! k = 1
//! r = 2
//! n = 20
//! levels = 4
//! n_list = 1, 2, 4, 8
//! direction = 1, 0
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::{Error, Result};

use super::study::StudyConfig;

pub const KEYS: &[&str] = &[
    "lambda", "mu", "rho", "rho_f", "omega", "k", "r0", "r", "n", "direction", "levels", "n_list",
    "k_list", "n_angular", "modes", "output",
];

fn parse_one<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: cannot parse `{value}` for {key}")))
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_one(line, key, s))
        .collect()
}

/// Apply every `key = value` line of `text` on top of `base`.
pub fn parse_config(text: &str, base: StudyConfig) -> Result<StudyConfig> {
    let mut cfg = base;
    let mut k_list_given = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line}: expected `key = value`")))?;
        let (key, value) = (key.trim(), value.trim());
        let p = &mut cfg.physical;
        match key {
            "lambda" => p.lambda = parse_one(line, key, value)?,
            "mu" => p.mu = parse_one(line, key, value)?,
            "rho" => p.rho = parse_one(line, key, value)?,
            "rho_f" => p.rho_f = parse_one(line, key, value)?,
            "omega" => p.omega = parse_one(line, key, value)?,
            "k" => {
                p.k = parse_one(line, key, value)?;
                if !k_list_given {
                    cfg.k_list = vec![p.k];
                }
            }
            "r0" => p.r0 = parse_one(line, key, value)?,
            "r" => p.r = parse_one(line, key, value)?,
            "n" => p.n_trunc = parse_one(line, key, value)?,
            "direction" => {
                let d: Vec<f64> = parse_list(line, key, value)?;
                if d.len() != 2 {
                    return Err(Error::Config(format!("line {line}: direction needs two components")));
                }
                p.direction = [d[0], d[1]];
            }
            "levels" => cfg.levels = parse_one(line, key, value)?,
            "n_list" => cfg.n_list = parse_list(line, key, value)?,
            "k_list" => {
                cfg.k_list = parse_list(line, key, value)?;
                k_list_given = true;
            }
            "n_angular" => cfg.n_angular = parse_one(line, key, value)?,
            "modes" => cfg.modes = Some(parse_one(line, key, value)?),
            "output" => cfg.output = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Config(format!(
                    "line {line}: unknown key `{other}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path, base: StudyConfig) -> Result<StudyConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, base)
}
