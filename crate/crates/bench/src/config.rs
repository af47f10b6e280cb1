//! Experiment configuration: defaults, `key=value` files, validation.

use std::fmt;
use std::str::FromStr;

use ipmatch::ade::SketchConstants;
use ipmatch::matching::{MatchParams, MatcherKind, OracleMode};
use ipmatch::maxip::LshConfig;
use ipmatch::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    UniformSphere,
    GaussianNormalized,
    /// `k` centers on the sphere, per-coordinate standard deviation `spread`.
    Clustered { k: usize, spread: f64 },
}

impl FromStr for Distribution {
    type Err = Error;

    /// `uniform-sphere`, `gaussian-normalized`, `clustered` or
    /// `clustered:<k>:<spread>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown distribution `{s}`"));
        let mut it = s.split(':');
        match it.next() {
            Some("uniform-sphere") => Ok(Distribution::UniformSphere),
            Some("gaussian-normalized") => Ok(Distribution::GaussianNormalized),
            Some("clustered") => {
                let k = it.next().map_or(Ok(4), str::parse).map_err(|_| bad())?;
                let spread = it.next().map_or(Ok(0.1), str::parse).map_err(|_| bad())?;
                if it.next().is_some() {
                    return Err(bad());
                }
                Ok(Distribution::Clustered { k, spread })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::UniformSphere => f.write_str("uniform-sphere"),
            Distribution::GaussianNormalized => f.write_str("gaussian-normalized"),
            Distribution::Clustered { k, spread } => write!(f, "clustered:{k}:{spread}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format `{s}`, expected csv or json"))),
        }
    }
}

/// `exact`, `mult:<eps>` or `add:<eps>`.
pub fn parse_noise(s: &str) -> Result<OracleMode> {
    let bad = || Error::Config(format!("unknown noise `{s}`, expected exact, mult:<eps> or add:<eps>"));
    match s.split_once(':') {
        None if s == "exact" || s == "none" => Ok(OracleMode::Exact),
        Some(("mult", e)) => Ok(OracleMode::Multiplicative(e.parse().map_err(|_| bad())?)),
        Some(("add", e)) => Ok(OracleMode::Additive(e.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub matcher: MatcherKind,
    pub n_offline: usize,
    pub m_online: usize,
    pub dim: usize,
    pub norm_bound: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub delta: f64,
    pub seed: u64,
    pub distribution: Distribution,
    pub output_format: OutputFormat,
    pub trials: usize,
    pub noise: OracleMode,
    pub sketch: SketchConstants,
    pub lsh: LshConfig,
    /// Check every update against the backing structure's guarantee.
    pub instrument: bool,
    /// Record per-update latency. Off makes reports byte-reproducible.
    pub timing: bool,
    /// Largest side for which the exact optimum is computed.
    pub opt_limit: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            matcher: MatcherKind::GreedyExactIp,
            n_offline: 200,
            m_online: 200,
            dim: 16,
            norm_bound: 1.0,
            epsilon: 0.05,
            tau: 0.1,
            delta: 0.1,
            seed: 0,
            distribution: Distribution::UniformSphere,
            output_format: OutputFormat::Csv,
            trials: 1,
            noise: OracleMode::Exact,
            sketch: SketchConstants::default(),
            lsh: LshConfig::default(),
            instrument: true,
            timing: true,
            opt_limit: 2000,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad value `{value}` for `{key}`"))),
    }
}

impl ExperimentConfig {
    /// Sets one field by its CLI flag name (without dashes).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "matcher" => self.matcher = v.parse()?,
            "n" => self.n_offline = parse(key, v)?,
            "m" => self.m_online = parse(key, v)?,
            "dim" => self.dim = parse(key, v)?,
            "norm-bound" => self.norm_bound = parse(key, v)?,
            "eps" => self.epsilon = parse(key, v)?,
            "tau" => self.tau = parse(key, v)?,
            "delta" => self.delta = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "dist" => self.distribution = v.parse()?,
            "format" => self.output_format = v.parse()?,
            "trials" => self.trials = parse(key, v)?,
            "noise" => self.noise = parse_noise(v)?,
            "sketch-rows" => self.sketch.rows = parse(key, v)?,
            "sketch-groups" => self.sketch.groups = parse(key, v)?,
            "max-tables" => self.lsh.max_tables = parse(key, v)?,
            "candidate-factor" => self.lsh.candidate_factor = parse(key, v)?,
            "instrument" => self.instrument = parse_bool(key, v)?,
            "timing" => self.timing = parse_bool(key, v)?,
            "opt-limit" => self.opt_limit = parse(key, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                msg: format!("expected key=value, got `{line}`"),
            })?;
            self.set(key, value).map_err(|e| Error::Parse {
                line: k + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_offline == 0 || self.dim == 0 || self.trials == 0 {
            return fail("n, dim and trials must be at least 1".into());
        }
        if !(self.norm_bound > 0.0 && self.norm_bound.is_finite()) {
            return fail(format!("norm bound must be positive, got {}", self.norm_bound));
        }
        for (name, x) in [("eps", self.epsilon), ("delta", self.delta)] {
            if !(x > 0.0 && x < 1.0) {
                return fail(format!("{name} must lie in (0, 1), got {x}"));
            }
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return fail(format!("tau must be positive, got {}", self.tau));
        }
        if let Distribution::Clustered { k, spread } = self.distribution {
            if k == 0 || !(spread >= 0.0 && spread.is_finite()) {
                return fail("clustered needs k >= 1 and a finite spread >= 0".into());
            }
        }
        Ok(())
    }

    pub fn match_params(&self, seed: u64) -> MatchParams {
        MatchParams {
            epsilon: self.epsilon,
            tau: self.tau,
            delta: self.delta,
            seed,
            sketch: self.sketch,
            lsh: self.lsh,
            noise: self.noise,
            instrument: self.instrument,
        }
    }
}
