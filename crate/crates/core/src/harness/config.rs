//! Experiment configuration: a flat `key = value` file, overridable field by
//! field from the command line.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::seqgen::SequenceSpec;

pub const MAX_N: usize = 1_000_000;
pub const MAX_ALPHA_SAMPLES: u64 = 10_000;

/// Which `N` to visit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// `n=N1,N2,...`
    Explicit(Vec<usize>),
    /// `m=A..B` or `m=m1,m2,...`, visited as `N_m = m²`.
    Squares(Vec<u64>),
}

impl Schedule {
    pub fn sizes(&self) -> Vec<usize> {
        match self {
            Schedule::Explicit(ns) => ns.clone(),
            Schedule::Squares(ms) => ms.iter().map(|&m| (m * m) as usize).collect(),
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, rest) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("schedule {s:?}: expected n=... or m=...")))?;
        let list = |rest: &str| -> Result<Vec<u64>> {
            if let Some((a, b)) = rest.split_once("..") {
                let (a, b) = (parse::<u64>(a, "schedule")?, parse::<u64>(b, "schedule")?);
                if a > b {
                    return Err(Error::Config(format!("empty schedule range {a}..{b}")));
                }
                Ok((a..=b).collect())
            } else {
                rest.split(',')
                    .map(|t| parse::<u64>(t, "schedule"))
                    .collect()
            }
        };
        let values = list(rest.trim())?;
        if values.is_empty() || values.contains(&0) {
            return Err(Error::Config(format!(
                "schedule {s:?} must list positive values"
            )));
        }
        match key.trim() {
            "n" => Ok(Schedule::Explicit(
                values.into_iter().map(|v| v as usize).collect(),
            )),
            "m" => Ok(Schedule::Squares(values)),
            other => Err(Error::Config(format!("unknown schedule kind {other:?}"))),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(",");
        match self {
            Schedule::Explicit(ns) => {
                write!(f, "n={}", join(ns.iter().map(|n| n.to_string()).collect()))
            }
            Schedule::Squares(ms) => {
                write!(f, "m={}", join(ms.iter().map(|m| m.to_string()).collect()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seq: SequenceSpec,
    /// `L = N^β`.
    pub beta: f64,
    pub schedule: Schedule,
    pub alpha_samples: u64,
    pub seed: u64,
    /// Deviation threshold: a sample deviates when `|Σ² − L| > δL`.
    pub delta: f64,
    /// Exponent slack used by growth diagnostics.
    pub epsilon: f64,
    /// When set, variances are estimated from this many random centres.
    pub mc_samples: Option<u64>,
    pub tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seq: SequenceSpec::monomial(2),
            beta: 0.3,
            schedule: Schedule::Explicit(vec![1000]),
            alpha_samples: 10,
            seed: 0,
            delta: 0.25,
            epsilon: 0.1,
            mc_samples: None,
            tol: 1e-6,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file on top of the defaults.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, path.parent())?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` and `;` start comments. Relative
    /// `custom:FILE` paths resolve against `base_dir`.
    pub fn apply_text(&mut self, text: &str, base_dir: Option<&Path>) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('[') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            self.set(key.trim(), value.trim(), base_dir)
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    /// Sets one field by name, as a config line or CLI flag would.
    pub fn set(&mut self, key: &str, value: &str, base_dir: Option<&Path>) -> Result<()> {
        match key {
            "seq" => self.seq = parse_sequence_arg(value, base_dir)?,
            "beta" => self.beta = parse(value, key)?,
            "schedule" => self.schedule = value.parse()?,
            "alphas" | "alpha_samples" => self.alpha_samples = parse(value, key)?,
            "seed" => self.seed = parse(value, key)?,
            "delta" => self.delta = parse(value, key)?,
            "epsilon" => self.epsilon = parse(value, key)?,
            "mc" | "mc_samples" => {
                self.mc_samples = match value {
                    "" | "none" | "off" => None,
                    v => Some(parse(v, key)?),
                }
            }
            "tol" => self.tol = parse(value, key)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::Config(format!(
                "beta = {} outside [0, 1)",
                self.beta
            )));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(Error::Config(format!(
                "delta = {} must be positive",
                self.delta
            )));
        }
        if self.alpha_samples == 0 {
            return Err(Error::Config("alphas must be at least 1".into()));
        }
        if self.alpha_samples > MAX_ALPHA_SAMPLES {
            return Err(Error::Budget(format!(
                "{} alpha samples exceed the budget of {MAX_ALPHA_SAMPLES}",
                self.alpha_samples
            )));
        }
        if let Some(&n) = self.schedule.sizes().iter().max() {
            if n > MAX_N {
                return Err(Error::Budget(format!(
                    "N = {n} exceeds the budget of {MAX_N}"
                )));
            }
        }
        if self.mc_samples == Some(0) || self.mc_samples == Some(1) {
            return Err(Error::Config("mc needs at least 2 samples".into()));
        }
        Ok(())
    }

    /// `β ≥ 1/2` lies outside the regime of the variance theorem; such runs
    /// are allowed but flagged.
    pub fn outside_regime(&self) -> bool {
        self.beta >= 0.5
    }

    /// The configuration as `key = value` lines that [`apply_text`] accepts.
    ///
    /// [`apply_text`]: Self::apply_text
    pub fn to_text(&self) -> String {
        let seq = match &self.seq.kind {
            crate::seqgen::SequenceKind::Custom(terms) => format!(
                "custom:{}",
                terms
                    .iter()
                    .map(|t| t.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            _ => self.seq.id(),
        };
        let mc = self
            .mc_samples
            .map_or("none".to_string(), |m| m.to_string());
        format!(
            "seq = {seq}\nbeta = {}\nschedule = {}\nalphas = {}\nseed = {}\ndelta = {}\nepsilon = {}\nmc = {mc}\ntol = {}\n",
            self.beta, self.schedule, self.alpha_samples, self.seed, self.delta, self.epsilon, self.tol
        )
    }
}

/// `monomial:d=2`, `lacunary:base=2`, `custom:1,2,3` or `custom:FILE`.
pub fn parse_sequence_arg(value: &str, base_dir: Option<&Path>) -> Result<SequenceSpec> {
    if let Some(rest) = value.strip_prefix("custom:") {
        let looks_inline = !rest.is_empty()
            && rest.chars().all(|c| {
                c.is_ascii_digit() || c == ',' || c == '-' || c == '+' || c.is_whitespace()
            });
        if !looks_inline {
            let path = Path::new(rest);
            let path = match base_dir {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path.to_path_buf(),
            };
            return SequenceSpec::from_file(path);
        }
    }
    value.parse()
}

fn parse<T: FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}
