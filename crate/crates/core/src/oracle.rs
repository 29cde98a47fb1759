//! Population targets `q_X(p)`, `m(X, r)` and `Γ^{(r)}` for a model.
//!
//! Constant-volatility models use the iid closed forms. Otherwise one long
//! registered path is simulated with a fixed seed. Conditionally on the
//! volatilities the marginal law is the mixture `F_X(x) = mean_t F_ε(x/σ_t)`,
//! so the quantile, the density there and `E|X|^r = E σ^r E|ε|^r` are taken
//! from that mixture rather than from order statistics and kernel smoothing.
//! `Γ` comes from the Bartlett long-run structure of the path evaluated at
//! the mixture quantile and density. Results are cached as JSON keyed by a
//! SHA-256 of the inputs.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::{assemble_gamma, estimate_tricov_at, iid_gamma_scaled, GammaMatrix, TriCov};
use crate::error::{Error, Result};
use crate::estimators::sample_quantile;
use crate::innovations::InnovationDist;
use crate::model::{simulate_path, ModelSpec};
use crate::numeric::Neumaier;

const CACHE_VERSION: &str = "oracle-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Bartlett truncation for the long-run structure.
    pub lag: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n: 10_000_000,
            burn_in: 100_000,
            seed: 0x0a11_ce5e_ed00,
            lag: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSource {
    ClosedForm,
    OraclePath(OracleConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Targets {
    pub p: f64,
    pub r: u32,
    /// `q_X(p)`.
    pub q: f64,
    /// `f_X(q_X(p))`.
    pub f: f64,
    /// `E|X − μ|^r`.
    pub m: f64,
    pub mu: f64,
    /// `E[(X−μ)^{r−1} sgn(X−μ)^r]`.
    pub a: f64,
    pub gamma: GammaMatrix,
    pub tricov: Option<TriCov>,
    pub source: TargetSource,
}

/// Targets for `(spec, dist, p, r)`, reading and writing `cache_dir` when
/// given.
pub fn targets(
    spec: &ModelSpec,
    dist: &InnovationDist,
    p: f64,
    r: u32,
    cfg: &OracleConfig,
    cache_dir: Option<&FsPath>,
) -> Result<Targets> {
    if let Some(s2) = spec.constant_sigma2() {
        return closed_form_targets(dist, s2.sqrt(), p, r);
    }
    let file = cache_dir.map(|d| d.join(format!("{}.json", cache_key(spec, dist, p, r, cfg))));
    if let Some(path) = &file {
        if let Ok(text) = fs::read_to_string(path) {
            if let Ok(t) = serde_json::from_str::<Targets>(&text) {
                return Ok(t);
            }
        }
    }
    let t = path_targets(spec, dist, p, r, cfg)?;
    if let Some(path) = &file {
        write_cache(path, &t)?;
    }
    Ok(t)
}

fn write_cache(path: &PathBuf, t: &Targets) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(t)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn cache_key(spec: &ModelSpec, dist: &InnovationDist, p: f64, r: u32, cfg: &OracleConfig) -> String {
    let payload = serde_json::json!({
        "version": CACHE_VERSION,
        "spec": spec,
        "dist": dist,
        "p": p,
        "r": r,
        "cfg": cfg,
    });
    let digest = Sha256::digest(payload.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// iid targets for `X = σ ε`.
pub fn closed_form_targets(dist: &InnovationDist, sigma: f64, p: f64, r: u32) -> Result<Targets> {
    let gamma = iid_gamma_scaled(dist, sigma, p, r)?;
    let q = sigma * dist.quantile(p);
    let f = dist.pdf(q / sigma).unwrap_or(0.0) / sigma;
    Ok(Targets {
        p,
        r,
        q,
        f,
        m: sigma.powi(r as i32) * dist.abs_moment(f64::from(r)),
        mu: 0.0,
        a: 0.0,
        gamma,
        tricov: None,
        source: TargetSource::ClosedForm,
    })
}

/// Quantile and density of the scale mixture `mean_t F_ε(x/σ_t)`.
pub fn mixture_quantile(dist: &InnovationDist, sigma: &[f64], p: f64, start: f64) -> Result<(f64, f64)> {
    let cdf = |x: f64| sigma.iter().map(|s| dist.cdf(x / s)).collect::<Neumaier>().total() / sigma.len() as f64;
    let pdf = |x: f64| {
        sigma
            .iter()
            .map(|s| dist.pdf(x / s).unwrap_or(0.0) / s)
            .collect::<Neumaier>()
            .total()
            / sigma.len() as f64
    };
    let mut x = start;
    for _ in 0..60 {
        let f = pdf(x);
        if !(f > 0.0) {
            return Err(Error::NonPositiveDensity { at: x, estimate: f });
        }
        let step = (cdf(x) - p) / f;
        x -= step;
        if step.abs() <= 1e-13 * x.abs().max(1.0) {
            return Ok((x, pdf(x)));
        }
    }
    Ok((x, pdf(x)))
}

fn path_targets(spec: &ModelSpec, dist: &InnovationDist, p: f64, r: u32, cfg: &OracleConfig) -> Result<Targets> {
    if !dist.has_density() {
        return Err(Error::Unsupported(
            "oracle targets need an innovation law with a density".into(),
        ));
    }
    let path = simulate_path(spec, dist, cfg.n, cfg.burn_in, cfg.seed)?;
    let sigma: Vec<f64> = path.sigma2.iter().map(|s| s.sqrt()).collect();
    let start = sample_quantile(&path.x, p)?;
    let (q, f) = mixture_quantile(dist, &sigma, p, start)?;
    let rf = f64::from(r);
    let m_sigma = sigma.iter().map(|s| s.powi(r as i32)).collect::<Neumaier>().total() / sigma.len() as f64;
    let m = m_sigma * dist.abs_moment(rf);
    drop(sigma);
    let tc = estimate_tricov_at(&path.x, p, r, Some(cfg.lag), q, f)?;
    // Symmetric innovations make X symmetric about 0, so the odd function
    // X^{r−1} sgn(X)^r has zero mean.
    let a = 0.0;
    Ok(Targets {
        p,
        r,
        q,
        f,
        m,
        mu: 0.0,
        a,
        gamma: assemble_gamma(&tc, a, r),
        tricov: Some(tc),
        source: TargetSource::OraclePath(*cfg),
    })
}
