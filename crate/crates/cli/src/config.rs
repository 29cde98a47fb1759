//! TOML run configuration.
//!
//! ```toml
//! innovation = "student_t"
//! nu = 8.0
//!
//! [model]
//! family = "garch"
//! omega = 0.05
//! alpha = [0.1]
//! beta = [0.8]
//!
//! [experiment]
//! p = 0.95
//! r = 2
//! n = 20000
//!
//! [output]
//! csv = "report.csv"
//! ```

use std::fmt;
use std::path::PathBuf;

use augarch_core::model::DEFAULT_BURN_IN;
use augarch_core::{ExperimentConfig, Family, InnovationDist, ModelSpec, Scaling, Tolerance, Tolerances};
use serde::Deserialize;

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_PRECISION: usize = 17;
pub const DEFAULT_T_GRID: [f64; 3] = [0.25, 0.5, 1.0];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: impl Into<String>, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub innovation: Option<String>,
    pub nu: Option<f64>,
    pub model: Option<RawModel>,
    #[serde(default)]
    pub experiment: RawExperiment,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    pub family: String,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub delta: Option<f64>,
    pub omega: f64,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub beta: Vec<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawExperiment {
    pub p: Option<f64>,
    pub r: Option<u32>,
    pub n: Option<usize>,
    pub burn_in: Option<usize>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub t_grid: Option<Vec<f64>>,
    pub lag: Option<usize>,
    pub scaling: Option<String>,
    pub tolerance: Option<f64>,
    pub fclt_tolerance: Option<f64>,
    pub se_mult: Option<f64>,
    pub delta_list: Option<Vec<usize>>,
    pub mc_draws: Option<usize>,
    pub oracle_n: Option<usize>,
    pub oracle_lag: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub csv: Option<PathBuf>,
    pub precision: Option<usize>,
}

/// Validated configuration with defaults applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dist: InnovationDist,
    pub model: Option<ModelSpec>,
    pub p: f64,
    pub r: u32,
    pub n: usize,
    pub burn_in: usize,
    pub replications: usize,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    /// `None` means the estimator default `⌊n^{1/3}⌋`.
    pub lag: Option<usize>,
    pub scaling: Scaling,
    pub tolerances: Tolerances,
    pub delta_list: Vec<usize>,
    pub mc_draws: Option<usize>,
    pub oracle_n: Option<usize>,
    pub oracle_lag: Option<usize>,
    pub csv: Option<PathBuf>,
    pub precision: usize,
    /// Human-readable `key = value` lines for every default that was applied.
    pub defaults: Vec<String>,
}

impl RunConfig {
    pub fn model(&self) -> Result<&ModelSpec, ConfigError> {
        self.model.as_ref().ok_or(ConfigError::Missing("model"))
    }

    pub fn experiment(&self) -> Result<ExperimentConfig, ConfigError> {
        let cfg = ExperimentConfig {
            spec: self.model()?.clone(),
            dist: self.dist.clone(),
            p: self.p,
            r: self.r,
            n: self.n,
            replications: self.replications,
            master_seed: self.seed,
            t_grid: self.t_grid.clone(),
            lag: self.lag,
            burn_in: self.burn_in,
            scaling: self.scaling,
            tolerances: self.tolerances.clone(),
        };
        cfg.validate().map_err(|e| invalid("experiment", e))?;
        Ok(cfg)
    }
}

pub fn load(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    resolve(raw)
}

fn default<T: fmt::Debug>(defaults: &mut Vec<String>, key: &str, value: Option<T>, fallback: T) -> T {
    value.unwrap_or_else(|| {
        defaults.push(format!("{key} = {fallback:?}"));
        fallback
    })
}

pub fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let mut defaults = Vec::new();
    let name = default(&mut defaults, "innovation", raw.innovation, "gaussian".to_string());
    let dist = InnovationDist::from_name(&name, raw.nu).map_err(|e| invalid("innovation", e))?;
    let model = raw.model.map(build_model).transpose()?;

    let e = raw.experiment;
    let p = default(&mut defaults, "experiment.p", e.p, 0.5);
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("experiment.p", format!("must lie in (0, 1), got {p}")));
    }
    let r = default(&mut defaults, "experiment.r", e.r, 1);
    if r < 1 {
        return Err(invalid("experiment.r", "must be at least 1"));
    }
    let n = default(&mut defaults, "experiment.n", e.n, 10_000);
    if n < 1 {
        return Err(invalid("experiment.n", "must be positive"));
    }
    let burn_in = default(&mut defaults, "experiment.burn_in", e.burn_in, DEFAULT_BURN_IN);
    let replications = default(&mut defaults, "experiment.replications", e.replications, 2_000);
    if replications < 2 {
        return Err(invalid("experiment.replications", "need at least 2"));
    }
    let seed = default(&mut defaults, "experiment.seed", e.seed, DEFAULT_SEED);
    let t_grid = default(&mut defaults, "experiment.t_grid", e.t_grid, DEFAULT_T_GRID.to_vec());
    if t_grid.last() != Some(&1.0) || t_grid.windows(2).any(|w| w[0] >= w[1]) || t_grid[0] <= 0.0 {
        return Err(invalid(
            "experiment.t_grid",
            "must be strictly increasing in (0, 1] and end at 1.0",
        ));
    }
    if e.lag.is_none() {
        defaults.push(format!(
            "experiment.lag = floor(n^(1/3)) = {}",
            augarch_core::asymptotics::default_lag(n)
        ));
    }
    if e.lag == Some(0) {
        return Err(invalid("experiment.lag", "must be positive"));
    }
    let scaling = match default(&mut defaults, "experiment.scaling", e.scaling, "literal".to_string()).as_str() {
        "literal" => Scaling::Literal,
        "prefix" => Scaling::Prefix,
        other => {
            return Err(invalid(
                "experiment.scaling",
                format!("expected literal or prefix, got {other:?}"),
            ))
        }
    };
    let tol = default(&mut defaults, "experiment.tolerance", e.tolerance, 0.10);
    let fclt_tol = default(&mut defaults, "experiment.fclt_tolerance", e.fclt_tolerance, 0.15);
    let se_mult = default(&mut defaults, "experiment.se_mult", e.se_mult, 3.0);
    for (key, v) in [
        ("experiment.tolerance", tol),
        ("experiment.fclt_tolerance", fclt_tol),
        ("experiment.se_mult", se_mult),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(invalid(key, format!("must be a non-negative number, got {v}")));
        }
    }
    let entry = |rel| Tolerance {
        rel,
        abs: None,
        se_mult: (se_mult > 0.0).then_some(se_mult),
        floor_frac: 0.1,
    };
    let tolerances = Tolerances {
        diagonal: entry(tol),
        off_diagonal: entry(tol),
        fclt: entry(fclt_tol),
    };
    let delta_list = default(&mut defaults, "experiment.delta_list", e.delta_list, (1..=20).collect());
    if delta_list.is_empty() || delta_list[0] == 0 || delta_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(
            "experiment.delta_list",
            "must be strictly increasing positive integers",
        ));
    }

    let precision = default(
        &mut defaults,
        "output.precision",
        raw.output.precision,
        DEFAULT_PRECISION,
    );
    if !(1..=17).contains(&precision) {
        return Err(invalid("output.precision", "must lie in 1..=17"));
    }
    Ok(RunConfig {
        dist,
        model,
        p,
        r,
        n,
        burn_in,
        replications,
        seed,
        t_grid,
        lag: e.lag,
        scaling,
        tolerances,
        delta_list,
        mc_draws: e.mc_draws,
        oracle_n: e.oracle_n,
        oracle_lag: e.oracle_lag,
        csv: raw.output.csv,
        precision,
        defaults,
    })
}

fn build_model(m: RawModel) -> Result<ModelSpec, ConfigError> {
    let family = Family::from_name(&m.family).ok_or_else(|| {
        let known: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
        invalid(
            "model.family",
            format!("unknown family {:?}; expected one of {}", m.family, known.join(", ")),
        )
    })?;
    let p = m.p.unwrap_or(m.alpha.len().max(m.gamma.len()).max(1));
    let q = m.q.unwrap_or(m.beta.len());
    ModelSpec::new(family, p, q, m.delta, m.omega, &m.alpha, &m.gamma, &m.beta).map_err(|e| match e {
        augarch_core::Error::InvalidParameter { name, reason } => invalid(format!("model.{name}"), reason),
        other => invalid("model", other),
    })
}
