//! Flat `key = value` run configuration.
//!
//! ```text
//! # Example 1 study
//! example = 1
//! N_list  = 4, 8, 16, 32
//! dt      = 0.00390625
//! T       = 1
//! scheme  = picard
//! alphas  = [0, 1]
//! coeffs  = [1, 1]
//! output  = example1.csv
//! ```
//!
//! Lists accept optional brackets. `#` starts a comment. Every key is
//! optional; unknown keys are rejected.

use std::fmt;
use std::str::FromStr;

use crate::solver::Scheme;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProblemKind {
    #[default]
    Example1,
    Example2,
    /// Steady linear solution `rho = x1`.
    Patch,
    /// Zero forcing and boundary data.
    Homogeneous,
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "example1" => Ok(Self::Example1),
            "2" | "example2" => Ok(Self::Example2),
            "patch" => Ok(Self::Patch),
            "homogeneous" | "zero" => Ok(Self::Homogeneous),
            other => Err(Error::Config(format!("unknown example {other:?}"))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Example1 => "1",
            Self::Example2 => "2",
            Self::Patch => "patch",
            Self::Homogeneous => "homogeneous",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Convergence,
    Stability,
    Single,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "convergence" => Ok(Self::Convergence),
            "stability" => Ok(Self::Stability),
            "single" => Ok(Self::Single),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// Initial data for problems without an exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialKind {
    #[default]
    Bump,
    /// Uniform random interior nodal values in `[-1, 1]`.
    Random,
    Zero,
}

impl FromStr for InitialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bump" => Ok(Self::Bump),
            "random" => Ok(Self::Random),
            "zero" => Ok(Self::Zero),
            other => Err(Error::Config(format!("unknown initial data {other:?}"))),
        }
    }
}

/// All run settings; `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub example: Option<ProblemKind>,
    pub n_list: Option<Vec<usize>>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub scheme: Option<Scheme>,
    pub alphas: Option<Vec<f64>>,
    pub coeffs: Option<Vec<f64>>,
    pub output: Option<String>,
    pub threads: Option<usize>,
    pub initial: Option<InitialKind>,
    pub seed: Option<u64>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value for {key}: {v:?}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let inner = v.trim();
    let inner = inner
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .unwrap_or(inner);
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    for q in ['"', '\''] {
        if let Some(s) = v.strip_prefix(q).and_then(|s| s.strip_suffix(q)) {
            return s;
        }
    }
    v
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got {raw:?}",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = unquote(value);
            match key {
                "mode" => cfg.mode = Some(value.parse()?),
                "example" => cfg.example = Some(value.parse()?),
                "N_list" | "N" => cfg.n_list = Some(parse_list(key, value)?),
                "dt" => cfg.dt = Some(parse_value(key, value)?),
                "T" => cfg.t_end = Some(parse_value(key, value)?),
                "scheme" => cfg.scheme = Some(value.parse()?),
                "alphas" => cfg.alphas = Some(parse_list(key, value)?),
                "coeffs" => cfg.coeffs = Some(parse_list(key, value)?),
                "output" => cfg.output = Some(value.to_string()),
                "threads" => cfg.threads = Some(parse_value(key, value)?),
                "initial" => cfg.initial = Some(value.parse()?),
                "seed" => cfg.seed = Some(parse_value(key, value)?),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    /// Replaces every field that `other` sets.
    pub fn overlay(&mut self, other: &RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => {
                $(if other.$f.is_some() {
                    self.$f = other.$f.clone();
                })*
            };
        }
        take!(
            mode, example, n_list, dt, t_end, scheme, alphas, coeffs, output, threads, initial,
            seed
        );
    }
}

/// Checks that refinement levels double: `N_{k+1} = 2 N_k`.
pub fn check_doubling(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::NonDoubling("empty N list".into()));
    }
    if let Some(w) = n_list.windows(2).find(|w| w[1] != 2 * w[0]) {
        return Err(Error::NonDoubling(format!(
            "{} is followed by {}",
            w[0], w[1]
        )));
    }
    Ok(())
}
