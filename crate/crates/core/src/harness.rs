//! Monte Carlo verification of the bivariate CLT, its functional version,
//! and the near-epoch-dependence decay of the Δ-dependent approximation.
//!
//! Replication `k` simulates on stream `k` of the master seed, so a report
//! is bit-identical for any thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::GammaMatrix;
use crate::error::{Error, Result};
use crate::estimators::{bahadur_residual, centred_abs_moment, moment_repr_residual, select_in_place};
use crate::innovations::InnovationDist;
use crate::model::{delta_dependent_path, simulate_path, simulate_path_stream, ModelSpec, Path};
use crate::numeric::{anderson_darling_normal, linear_fit, LinearFit, Neumaier};
use crate::oracle::Targets;

/// How the prefix statistic at time `t` is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `√n · t · T_{[nt]}`; covariance `min(s,t) Γ`.
    #[default]
    Literal,
    /// `√[nt] · T_{[nt]}`; covariance `min(s,t)/√(st) Γ`.
    Prefix,
}

impl Scaling {
    /// Factor multiplying `Γ` in `Cov(Y(s), Y(t))`.
    pub fn kernel(self, s: f64, t: f64) -> f64 {
        match self {
            Scaling::Literal => s.min(t),
            Scaling::Prefix => s.min(t) / (s * t).sqrt(),
        }
    }
}

/// Per-entry acceptance rule: pass when the relative error is within `rel`,
/// or the absolute difference is within `abs` (when set), or within
/// `se_mult` Monte Carlo standard errors (when set). Relative errors divide
/// by `max(|target|, floor_frac · trace)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: Option<f64>,
    pub se_mult: Option<f64>,
    pub floor_frac: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            rel,
            abs: None,
            se_mult: None,
            floor_frac: 0.1,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 0.10,
            abs: None,
            se_mult: Some(3.0),
            floor_frac: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// Diagonal entries `Γ₁₁`, `Γ₂₂`.
    pub diagonal: Tolerance,
    pub off_diagonal: Tolerance,
    /// Cross-time FCLT entries.
    pub fclt: Tolerance,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            diagonal: Tolerance::default(),
            off_diagonal: Tolerance::default(),
            fclt: Tolerance {
                rel: 0.15,
                ..Tolerance::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub spec: ModelSpec,
    pub dist: InnovationDist,
    pub p: f64,
    pub r: u32,
    pub n: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub t_grid: Vec<f64>,
    pub lag: Option<usize>,
    pub burn_in: usize,
    pub scaling: Scaling,
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::invalid("replications", "need at least 2"));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::invalid("p", format!("must lie in (0, 1), got {}", self.p)));
        }
        if self.r < 1 {
            return Err(Error::invalid("r", "must be at least 1"));
        }
        if self.n < 2 {
            return Err(Error::invalid("n", "must be at least 2"));
        }
        let g = &self.t_grid;
        if g.is_empty() || g.last() != Some(&1.0) {
            return Err(Error::invalid("t_grid", "must end at 1.0"));
        }
        if g.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::invalid("t_grid", "values must lie in (0, 1]"));
        }
        if g.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("t_grid", "must be strictly increasing"));
        }
        if g.iter().any(|&t| prefix_len(self.n, t) == 0) {
            return Err(Error::invalid("t_grid", "a grid time selects an empty prefix"));
        }
        Ok(())
    }
}

/// `[nt]`, the nearest integer to `nt`.
pub fn prefix_len(n: usize, t: f64) -> usize {
    ((n as f64 * t).round() as usize).min(n)
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryCheck {
    pub label: String,
    pub empirical: f64,
    pub target: f64,
    pub relative_error: f64,
    pub abs_diff: f64,
    pub std_err: f64,
    pub pass: bool,
}

fn check_entry(label: String, empirical: f64, target: f64, std_err: f64, floor: f64, tol: &Tolerance) -> EntryCheck {
    let abs_diff = (empirical - target).abs();
    let relative_error = abs_diff / target.abs().max(tol.floor_frac * floor);
    let pass = relative_error <= tol.rel
        || tol.abs.is_some_and(|a| abs_diff <= a)
        || tol.se_mult.is_some_and(|k| abs_diff <= k * std_err);
    EntryCheck {
        label,
        empirical,
        target,
        relative_error,
        abs_diff,
        std_err,
        pass,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalityCheck {
    pub coordinate: &'static str,
    pub statistic: f64,
    pub critical_1pct: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FcltCheck {
    pub s: f64,
    pub t: f64,
    pub entry: EntryCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub empirical_gamma: GammaMatrix,
    pub target_gamma: GammaMatrix,
    pub entries: Vec<EntryCheck>,
    pub fclt: Vec<FcltCheck>,
    pub normality: Vec<NormalityCheck>,
    pub replications: usize,
    pub premises_unchecked: bool,
}

impl ExperimentReport {
    pub fn relative_errors(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.relative_error).collect()
    }

    pub fn max_relative_error(&self) -> f64 {
        self.entries.iter().map(|e| e.relative_error).fold(0.0, f64::max)
    }

    pub fn clt_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn fclt_pass(&self) -> bool {
        self.fclt.iter().all(|c| c.entry.pass)
    }

    pub fn normality_pass(&self) -> bool {
        self.normality.iter().all(|c| c.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.clt_pass() && self.fclt_pass() && !self.premises_unchecked
    }
}

/// Scaled statistics `[quantile, moment]` at every grid time, per
/// replication, in replication order.
pub fn replicate(cfg: &ExperimentConfig, targets: &Targets) -> Result<Vec<Vec<[f64; 2]>>> {
    cfg.validate()?;
    let rn = (cfg.n as f64).sqrt();
    let outcomes: Vec<Result<Vec<[f64; 2]>>> = (0..cfg.replications)
        .into_par_iter()
        .map(|k| {
            let stream = k as u64;
            let path = simulate_path_stream(&cfg.spec, &cfg.dist, cfg.n, cfg.burn_in, cfg.master_seed, stream)
                .map_err(|e| Error::Replication {
                    seed: cfg.master_seed,
                    stream,
                    source: Box::new(e),
                })?;
            let mut buf = Vec::with_capacity(cfg.n);
            cfg.t_grid
                .iter()
                .map(|&t| {
                    let len = prefix_len(cfg.n, t);
                    let prefix = &path.x[..len];
                    buf.clear();
                    buf.extend_from_slice(prefix);
                    let q_hat = select_in_place(&mut buf, cfg.p);
                    let m_hat = centred_abs_moment(prefix, cfg.r, None)?;
                    let scale = match cfg.scaling {
                        Scaling::Literal => rn * t,
                        Scaling::Prefix => (len as f64).sqrt(),
                    };
                    Ok([scale * (q_hat - targets.q), scale * (m_hat - targets.m)])
                })
                .collect()
        })
        .collect();
    outcomes.into_iter().collect()
}

/// Covariance of `a` and `b` centred at their sample means, with the
/// standard error of the mean of the centred products.
fn cov_with_se(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let ma = a.iter().copied().collect::<Neumaier>().total() / n;
    let mb = b.iter().copied().collect::<Neumaier>().total() / n;
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let c = prods.iter().copied().collect::<Neumaier>().total() / (n - 1.0);
    let var = prods.iter().map(|p| (p - c) * (p - c)).collect::<Neumaier>().total() / (n - 1.0);
    (c, (var / n).sqrt())
}

fn column(stats: &[Vec<[f64; 2]>], t_idx: usize, coord: usize) -> Vec<f64> {
    stats.iter().map(|s| s[t_idx][coord]).collect()
}

/// Empirical `Cov(Y(s), Y(t))` as `[[c00, c01], [c10, c11]]` with SEs,
/// where `c_ab = Cov(Y_a(s), Y_b(t))`.
fn cross_cov(stats: &[Vec<[f64; 2]>], si: usize, ti: usize) -> [[(f64, f64); 2]; 2] {
    let mut out = [[(0.0, 0.0); 2]; 2];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = cov_with_se(&column(stats, si, a), &column(stats, ti, b));
        }
    }
    out
}

const NAMES: [[&str; 2]; 2] = [["g11", "g12"], ["g21", "g22"]];

fn gamma_checks(emp: &[[(f64, f64); 2]; 2], target: &GammaMatrix, tols: &Tolerances, prefix: &str) -> Vec<EntryCheck> {
    let floor = target.trace().abs();
    [(0, 0), (1, 1), (0, 1)]
        .into_iter()
        .map(|(i, j)| {
            let tol = if i == j { &tols.diagonal } else { &tols.off_diagonal };
            let (v, se) = emp[i][j];
            check_entry(
                format!("{prefix}{}", NAMES[i][j]),
                v,
                target.entry(i, j),
                se,
                floor,
                tol,
            )
        })
        .collect()
}

/// Bivariate CLT: empirical covariance of `√n(q̂ − q, m̂ − m)` at `t = 1`
/// against `targets.gamma`.
pub fn run_clt(cfg: &ExperimentConfig, targets: &Targets) -> Result<ExperimentReport> {
    let clt_cfg = ExperimentConfig {
        t_grid: vec![1.0],
        ..cfg.clone()
    };
    let stats = replicate(&clt_cfg, targets)?;
    Ok(build_report(&clt_cfg, targets, &stats, FcltTarget::Gamma))
}

/// What the cross-time covariances are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FcltTarget {
    /// `kernel(s,t) · Γ` with `Γ` from the targets.
    #[default]
    Gamma,
    /// `kernel(s,t) · Ĉov(Y(1), Y(1))`: Brownian proportionality only.
    EmpiricalUnitTime,
}

/// Functional CLT on `cfg.t_grid`. The `t = 1` block is the CLT check.
pub fn run_fclt(cfg: &ExperimentConfig, targets: &Targets, target: FcltTarget) -> Result<ExperimentReport> {
    let stats = replicate(cfg, targets)?;
    Ok(build_report(cfg, targets, &stats, target))
}

/// Assembles a report from precomputed replication statistics.
pub fn build_report(
    cfg: &ExperimentConfig,
    targets: &Targets,
    stats: &[Vec<[f64; 2]>],
    target: FcltTarget,
) -> ExperimentReport {
    let last = cfg.t_grid.len() - 1;
    let unit = cross_cov(stats, last, last);
    let sym = 0.5 * (unit[0][1].0 + unit[1][0].0);
    let empirical_gamma = GammaMatrix::new(unit[0][0].0, unit[1][1].0, sym);
    let entries = gamma_checks(&unit, &targets.gamma, &cfg.tolerances, "");
    let base = match target {
        FcltTarget::Gamma => targets.gamma.clone(),
        FcltTarget::EmpiricalUnitTime => empirical_gamma.clone(),
    };
    let mut fclt = Vec::new();
    if cfg.t_grid.len() > 1 {
        for si in 0..cfg.t_grid.len() {
            for ti in si..cfg.t_grid.len() {
                let (s, t) = (cfg.t_grid[si], cfg.t_grid[ti]);
                if target == FcltTarget::EmpiricalUnitTime && si == last && ti == last {
                    continue;
                }
                let k = cfg.scaling.kernel(s, t);
                let tgt = base.scaled(k);
                let emp = cross_cov(stats, si, ti);
                let floor = tgt.trace().abs();
                for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let (v, se) = emp[i][j];
                    let label = format!("cov_{}({s},{t})", NAMES[i][j]);
                    fclt.push(FcltCheck {
                        s,
                        t,
                        entry: check_entry(label, v, tgt.entry(i, j), se, floor, &cfg.tolerances.fclt),
                    });
                }
            }
        }
    }
    let normality = if stats.len() >= 8 {
        ["quantile", "moment"]
            .into_iter()
            .enumerate()
            .map(|(c, name)| {
                let (a2, crit) = anderson_darling_normal(&column(stats, last, c));
                NormalityCheck {
                    coordinate: name,
                    statistic: a2,
                    critical_1pct: crit,
                    pass: a2 < crit,
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    ExperimentReport {
        empirical_gamma,
        target_gamma: targets.gamma.clone(),
        entries,
        fclt,
        normality,
        replications: stats.len(),
        premises_unchecked: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NedPoint {
    pub delta: usize,
    pub rms_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NedReport {
    pub points: Vec<NedPoint>,
    /// Fit of `ln rms_gap` on `Δ` over the strictly positive gaps.
    pub fit: Option<LinearFit>,
}

impl NedReport {
    pub fn all_zero(&self) -> bool {
        self.points.iter().all(|p| p.rms_gap == 0.0)
    }
}

/// RMS of `X_t − X_t^{(Δ)}` over the retained path for each `Δ`, on shared
/// innovations.
pub fn ned_decay(
    spec: &ModelSpec,
    dist: &InnovationDist,
    deltas: &[usize],
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<NedReport> {
    if deltas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("delta_list", "must be strictly increasing"));
    }
    let full = simulate_path(spec, dist, n, burn_in, seed)?;
    let points = deltas
        .par_iter()
        .map(|&d| {
            let approx = delta_dependent_path(spec, dist, n, burn_in, d, seed)?;
            Ok(NedPoint {
                delta: d,
                rms_gap: rms_gap(&full, &approx),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.rms_gap > 0.0)
        .map(|p| (p.delta as f64, p.rms_gap.ln()))
        .unzip();
    Ok(NedReport {
        fit: linear_fit(&x, &y),
        points,
    })
}

fn rms_gap(a: &Path, b: &Path) -> f64 {
    let s: Neumaier = a.x.iter().zip(&b.x).map(|(x, y)| (x - y) * (x - y)).collect();
    (s.total() / a.x.len() as f64).sqrt()
}

/// Median of `|statistic|` over replications at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayPoint {
    pub n: usize,
    pub median_abs: f64,
}

pub fn strictly_decreasing(points: &[DecayPoint]) -> bool {
    points.windows(2).all(|w| w[1].median_abs < w[0].median_abs)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Common driver: for each `n`, `reps` independent paths on streams
/// `0..reps` of `seed`, reduced by `stat` and summarised by the median of
/// absolute values.
pub fn decay_study<F>(
    spec: &ModelSpec,
    dist: &InnovationDist,
    ns: &[usize],
    reps: usize,
    burn_in: usize,
    seed: u64,
    stat: F,
) -> Result<Vec<DecayPoint>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    ns.iter()
        .map(|&n| {
            let vals: Vec<Result<f64>> = (0..reps)
                .into_par_iter()
                .map(|k| {
                    let path = simulate_path_stream(spec, dist, n, burn_in, seed, k as u64).map_err(|e| {
                        Error::Replication {
                            seed,
                            stream: k as u64,
                            source: Box::new(e),
                        }
                    })?;
                    stat(&path.x).map(f64::abs)
                })
                .collect();
            Ok(DecayPoint {
                n,
                median_abs: median(vals.into_iter().collect::<Result<Vec<_>>>()?),
            })
        })
        .collect()
}

/// Median `|√n · bahadur_residual|` across sample sizes.
#[allow(clippy::too_many_arguments)]
pub fn bahadur_decay(
    spec: &ModelSpec,
    dist: &InnovationDist,
    p: f64,
    q_true: f64,
    f_at_q: f64,
    ns: &[usize],
    reps: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<DecayPoint>> {
    decay_study(spec, dist, ns, reps, burn_in, seed, |xs| {
        Ok((xs.len() as f64).sqrt() * bahadur_residual(xs, p, q_true, f_at_q)?)
    })
}

/// Median `|moment_repr_residual|` across sample sizes.
#[allow(clippy::too_many_arguments)]
pub fn moment_residual_decay(
    spec: &ModelSpec,
    dist: &InnovationDist,
    r: u32,
    mu: f64,
    a: f64,
    ns: &[usize],
    reps: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<DecayPoint>> {
    decay_study(spec, dist, ns, reps, burn_in, seed, |xs| {
        moment_repr_residual(xs, r, mu, a)
    })
}
