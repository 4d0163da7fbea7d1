//! Flat key-value config files for the `run` subcommand.
//!
//! Keys mirror the flag names; `#` starts a comment. Example:
//!
//! ```text
//! # full intercept-resend at half transmission
//! seed = 7
//! blocks = 4
//! t = 0.5
//! mu = 1.0
//! eps-t = 0.1
//! ```

use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunFileError {
    Malformed { line: usize, content: String },
    UnknownKey { line: usize, key: String },
    BadValue { line: usize, key: String, value: String },
    DuplicateKey { line: usize, key: String },
}

impl fmt::Display for RunFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunFileError::Malformed { line, content } => {
                write!(f, "line {line}: expected `key = value`, got `{content}`")
            }
            RunFileError::UnknownKey { line, key } => {
                write!(f, "line {line}: unknown key `{key}`")
            }
            RunFileError::BadValue { line, key, value } => {
                write!(f, "line {line}: bad value `{value}` for `{key}`")
            }
            RunFileError::DuplicateKey { line, key } => {
                write!(f, "line {line}: key `{key}` given twice")
            }
        }
    }
}

impl std::error::Error for RunFileError {}

/// Parameters a run config file may set. Everything is optional here;
/// defaults and overrides are resolved by the caller.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFile {
    pub seed: Option<u64>,
    pub blocks: Option<usize>,
    pub pulses: Option<usize>,
    pub test_pulses: Option<usize>,
    pub reveal_m: Option<usize>,
    pub va: Option<f64>,
    pub eta: Option<f64>,
    pub eps_t: Option<f64>,
    pub beta: Option<f64>,
    pub nsigma: Option<f64>,
    pub t: Option<f64>,
    pub mu: Option<f64>,
    pub out: Option<String>,
}

const KEYS: &[&str] = &[
    "seed",
    "blocks",
    "pulses",
    "test-pulses",
    "reveal-m",
    "va",
    "eta",
    "eps-t",
    "beta",
    "nsigma",
    "t",
    "mu",
    "out",
];

pub fn parse(text: &str) -> Result<RunFile, RunFileError> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut file = RunFile::default();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.split_once('#') {
            Some((before, _)) => before,
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| RunFileError::Malformed {
            line: line_no,
            content: line.to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        let canonical = KEYS
            .iter()
            .find(|&&k| k == key)
            .ok_or_else(|| RunFileError::UnknownKey {
                line: line_no,
                key: key.to_string(),
            })?;
        if seen.insert(canonical, line_no).is_some() {
            return Err(RunFileError::DuplicateKey {
                line: line_no,
                key: key.to_string(),
            });
        }

        let bad = || RunFileError::BadValue {
            line: line_no,
            key: key.to_string(),
            value: value.to_string(),
        };
        match *canonical {
            "seed" => file.seed = Some(value.parse().map_err(|_| bad())?),
            "blocks" => file.blocks = Some(value.parse().map_err(|_| bad())?),
            "pulses" => file.pulses = Some(value.parse().map_err(|_| bad())?),
            "test-pulses" => file.test_pulses = Some(value.parse().map_err(|_| bad())?),
            "reveal-m" => file.reveal_m = Some(value.parse().map_err(|_| bad())?),
            "va" => file.va = Some(value.parse().map_err(|_| bad())?),
            "eta" => file.eta = Some(value.parse().map_err(|_| bad())?),
            "eps-t" => file.eps_t = Some(value.parse().map_err(|_| bad())?),
            "beta" => file.beta = Some(value.parse().map_err(|_| bad())?),
            "nsigma" => file.nsigma = Some(value.parse().map_err(|_| bad())?),
            "t" => file.t = Some(value.parse().map_err(|_| bad())?),
            "mu" => file.mu = Some(value.parse().map_err(|_| bad())?),
            "out" => file.out = Some(value.to_string()),
            _ => unreachable!(),
        }
    }
    Ok(file)
}
