//! Long-run covariance structure of `(U, V, W)` and the 2×2 limit
//! covariance `Γ^{(r)}` of the scaled (quantile, absolute moment) vector.
//!
//! With `U = X`, `V = |X|^r` and `W = (p − 1{X ≤ q})/f(q)`:
//!
//! ```text
//! Γ₁₁ = Var_LR(W)
//! Γ₂₂ = r² a² Var_LR(U) + Var_LR(V) − 2 r a Cov_LR(U, V)
//! Γ₁₂ = −r a Cov_LR(U, W) + Cov_LR(V, W)
//! ```
//!
//! where `a = E[X^{r−1} sgn(X)^r]` and `LR` denotes long-run (co)variances.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{centred_abs_moment, select_in_place};
use crate::innovations::{InnovationDist, InnovationKind};
use crate::numeric::mean;

/// Default Bartlett truncation `⌊n^{1/3}⌋`.
pub fn default_lag(n: usize) -> usize {
    let mut l = (n as f64).cbrt().floor() as usize;
    // Guard against cbrt rounding just below an exact cube.
    while (l + 1).pow(3) <= n {
        l += 1;
    }
    l
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub q_p: f64,
    pub f_at_q: f64,
    pub bandwidth: f64,
}

/// Silverman's rule `0.9 min(sd, IQR/1.34) n^{−1/5}`.
pub fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let sd = (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut buf = xs.to_vec();
    let q75 = select_in_place(&mut buf, 0.75);
    let q25 = select_in_place(&mut buf, 0.25);
    let iqr = (q75 - q25) / 1.34;
    let spread = if iqr > 0.0 { sd.min(iqr) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian kernel density estimate at `x`.
pub fn kde_at(xs: &[f64], x: f64, h: f64) -> f64 {
    let norm = 1.0 / (xs.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let s: f64 = xs
        .iter()
        .map(|&v| {
            let z = (x - v) / h;
            (-0.5 * z * z).exp()
        })
        .sum();
    s * norm
}

/// Sample quantile and Gaussian-KDE density there.
pub fn estimate_density_at_quantile(xs: &[f64], p: f64, bandwidth: Option<f64>) -> Result<DensityEstimate> {
    if xs.len() < 100 {
        return Err(Error::invalid(
            "xs",
            format!("need at least 100 observations, got {}", xs.len()),
        ));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            what: "p",
            value: p,
            expected: "(0, 1)",
        });
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::invalid("bandwidth", format!("must be > 0, got {h}"))),
        None => silverman_bandwidth(xs),
    };
    let mut buf = xs.to_vec();
    let q_p = select_in_place(&mut buf, p);
    let f_at_q = kde_at(xs, q_p, h);
    if !(f_at_q > 0.0) {
        return Err(Error::NonPositiveDensity {
            at: q_p,
            estimate: f_at_q,
        });
    }
    Ok(DensityEstimate {
        q_p,
        f_at_q,
        bandwidth: h,
    })
}

/// Density estimates at half, default and double bandwidth.
pub fn density_sensitivity(xs: &[f64], p: f64) -> Result<[DensityEstimate; 3]> {
    let h = silverman_bandwidth(xs);
    Ok([
        estimate_density_at_quantile(xs, p, Some(0.5 * h))?,
        estimate_density_at_quantile(xs, p, Some(h))?,
        estimate_density_at_quantile(xs, p, Some(2.0 * h))?,
    ])
}

/// Dot product with independent partial sums so the loop vectorises.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 8];
    let chunks = n / 8;
    for c in 0..chunks {
        let base = c * 8;
        for k in 0..8 {
            acc[k] += a[base + k] * b[base + k];
        }
    }
    let mut tail = 0.0;
    for i in chunks * 8..n {
        tail += a[i] * b[i];
    }
    acc.iter().sum::<f64>() + tail
}

fn centred(xs: &[f64]) -> Vec<f64> {
    let m = mean(xs);
    xs.iter().map(|x| x - m).collect()
}

fn check_lag(n: usize, lag: usize) -> Result<()> {
    if 2 * lag >= n {
        return Err(Error::invalid("L", format!("lag {lag} must be below n/2 = {}", n / 2)));
    }
    Ok(())
}

/// Bartlett long-run covariance
/// `Ĉ₀ + Σ_{i=1}^{L} (1 − i/(L+1)) (Ĉ_i + Ĉ_{−i})`, with
/// `Ĉ_i = (1/n) Σ_t (a_{t+i} − ā)(b_t − b̄)`.
pub fn long_run_cov(a: &[f64], b: &[f64], lag: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("b", "series lengths differ"));
    }
    check_lag(a.len(), lag)?;
    let m = long_run_cov_matrix(&[a, b], lag)?;
    Ok(m[0][1])
}

/// Bartlett long-run covariance matrix of several equal-length series.
/// Entry `(x, y)` is [`long_run_cov`] of series `x` and `y`; the result is
/// symmetric.
pub fn long_run_cov_matrix(series: &[&[f64]], lag: usize) -> Result<Vec<Vec<f64>>> {
    let k = series.len();
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    let n = series[0].len();
    if series.iter().any(|s| s.len() != n) {
        return Err(Error::invalid("series", "lengths differ"));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    check_lag(n, lag)?;
    let c: Vec<Vec<f64>> = series.iter().map(|s| centred(s)).collect();
    let nf = n as f64;
    let mut out = vec![vec![0.0; k]; k];
    for x in 0..k {
        for y in x..k {
            out[x][y] = dot(&c[x], &c[y]) / nf;
        }
    }
    for i in 1..=lag {
        let w = 1.0 - i as f64 / (lag as f64 + 1.0);
        for x in 0..k {
            for y in x..k {
                // Ĉ_i(x, y) + Ĉ_{−i}(x, y) = Ĉ_i(x, y) + Ĉ_i(y, x).
                let fwd = dot(&c[x][i..], &c[y][..n - i]);
                let bwd = if x == y { fwd } else { dot(&c[y][i..], &c[x][..n - i]) };
                out[x][y] += w * (fwd + bwd) / nf;
            }
        }
    }
    for x in 1..k {
        let (upper, lower) = out.split_at_mut(x);
        for (y, row) in upper.iter().enumerate() {
            lower[0][y] = row[x];
        }
    }
    Ok(out)
}

/// `Σ_{i=1}^{L} |Ĉ_i|` of one series, the absolute-summability diagnostic.
pub fn abs_autocov_sum(a: &[f64], lag: usize) -> Result<f64> {
    check_lag(a.len(), lag)?;
    let c = centred(a);
    let n = c.len();
    Ok((1..=lag).map(|i| (dot(&c[i..], &c[..n - i]) / n as f64).abs()).sum())
}

/// Long-run covariance structure of `(U, V, W)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriCov {
    pub var_u: f64,
    pub var_v: f64,
    pub var_w: f64,
    pub cov_uv: f64,
    pub cov_uw: f64,
    pub cov_vw: f64,
    pub f_at_q: f64,
    pub q_p: f64,
    pub lag_l: usize,
    pub r: u32,
    pub p: f64,
}

impl TriCov {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.var_u,
            self.cov_uv,
            self.cov_uw, //
            self.cov_uv,
            self.var_v,
            self.cov_vw, //
            self.cov_uw,
            self.cov_vw,
            self.var_w,
        )
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix()).eigenvalues.min()
    }

    /// Smallest eigenvalue `≥ −1e-8 · trace`.
    pub fn is_psd(&self) -> bool {
        let tr = self.var_u + self.var_v + self.var_w;
        self.min_eigenvalue() >= -1e-8 * tr.abs()
    }
}

/// Builds `(U, V, W)` with plug-in `q̂`, KDE `f̂` and `m̂`, then their
/// Bartlett long-run covariances. `lag` defaults to `⌊n^{1/3}⌋`.
pub fn estimate_tricov(xs: &[f64], p: f64, r: u32, lag: Option<usize>) -> Result<TriCov> {
    let dens = estimate_density_at_quantile(xs, p, None)?;
    estimate_tricov_at(xs, p, r, lag, dens.q_p, dens.f_at_q)
}

/// [`estimate_tricov`] with the quantile and density supplied.
pub fn estimate_tricov_at(xs: &[f64], p: f64, r: u32, lag: Option<usize>, q: f64, f: f64) -> Result<TriCov> {
    let n = xs.len();
    let lag = lag.unwrap_or_else(|| default_lag(n));
    if n < 10 * lag.max(1) {
        return Err(Error::invalid(
            "L",
            format!("path length {n} is below 10·L = {}", 10 * lag),
        ));
    }
    if !(f > 0.0) {
        return Err(Error::NonPositiveDensity { at: q, estimate: f });
    }
    let m_hat = centred_abs_moment(xs, r, None)?;
    let v: Vec<f64> = xs.iter().map(|x| x.abs().powi(r as i32) - m_hat).collect();
    let w: Vec<f64> = xs.iter().map(|&x| (p - if x <= q { 1.0 } else { 0.0 }) / f).collect();
    let m = long_run_cov_matrix(&[xs, &v, &w], lag)?;
    Ok(TriCov {
        var_u: m[0][0],
        var_v: m[1][1],
        var_w: m[2][2],
        cov_uv: m[0][1],
        cov_uw: m[0][2],
        cov_vw: m[1][2],
        f_at_q: f,
        q_p: q,
        lag_l: lag,
        r,
        p,
    })
}

/// Symmetric 2×2 limit covariance; `g21 = g12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaMatrix {
    pub g11: f64,
    pub g22: f64,
    pub g12: f64,
    /// Set when the matrix fails the PSD check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl GammaMatrix {
    pub fn new(g11: f64, g22: f64, g12: f64) -> Self {
        let mut g = Self {
            g11,
            g22,
            g12,
            warning: None,
        };
        if !g.is_psd() {
            g.warning = Some(format!(
                "not positive semidefinite: g11 = {g11}, g22 = {g22}, g12 = {g12}"
            ));
        }
        g
    }

    pub fn g21(&self) -> f64 {
        self.g12
    }

    pub fn trace(&self) -> f64 {
        self.g11 + self.g22
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.g11,
            (1, 1) => self.g22,
            _ => self.g12,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(c * self.g11, c * self.g22, c * self.g12)
    }

    /// `g11, g22 ≥ 0` and `|g12| ≤ √(g11 g22) + 1e-8 (g11 + g22)`.
    pub fn is_psd(&self) -> bool {
        self.g11 >= 0.0
            && self.g22 >= 0.0
            && self.g12.abs() <= (self.g11 * self.g22).sqrt() + 1e-8 * (self.g11 + self.g22)
    }
}

/// `Γ^{(r)}` from the long-run structure and `a = E[X^{r−1} sgn(X)^r]`.
pub fn assemble_gamma(tc: &TriCov, a_coeff: f64, r: u32) -> GammaMatrix {
    let rf = f64::from(r);
    let g11 = tc.var_w;
    let g22 = rf * rf * a_coeff * a_coeff * tc.var_u + tc.var_v - 2.0 * rf * a_coeff * tc.cov_uv;
    let g12 = -rf * a_coeff * tc.cov_uw + tc.cov_vw;
    GammaMatrix::new(g11, g22, g12)
}

/// Closed-form `Γ^{(r)}` for iid `X = ε` with a symmetric law, where `a = 0`:
///
/// ```text
/// Γ₁₁ = p(1−p)/f(q)²
/// Γ₂₂ = E|X|^{2r} − (E|X|^r)²
/// Γ₁₂ = −(E[|X|^r 1{X ≤ q}] − p E|X|^r) / f(q)
/// ```
pub fn iid_gamma(dist: &InnovationDist, p: f64, r: u32) -> Result<GammaMatrix> {
    iid_gamma_scaled(dist, 1.0, p, r)
}

/// [`iid_gamma`] for `X = σ ε`.
pub fn iid_gamma_scaled(dist: &InnovationDist, sigma: f64, p: f64, r: u32) -> Result<GammaMatrix> {
    if matches!(dist.kind(), InnovationKind::Rademacher) {
        return Err(Error::Unsupported(
            "the Rademacher law has no density at its quantiles".into(),
        ));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            what: "p",
            value: p,
            expected: "(0, 1)",
        });
    }
    if r < 1 {
        return Err(Error::invalid("r", "must be at least 1"));
    }
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma", "must be > 0"));
    }
    let rf = f64::from(r);
    let q = dist.quantile(p);
    let f = dist.pdf(q).unwrap_or(0.0);
    if !(f > 0.0) {
        return Err(Error::NonPositiveDensity { at: q, estimate: f });
    }
    let m_r = dist.abs_moment(rf);
    let m_2r = dist.abs_moment(2.0 * rf);
    let trunc = dist.truncated_abs_moment(rf, q);
    let g11 = p * (1.0 - p) / (f * f);
    let g22 = m_2r - m_r * m_r;
    let g12 = -(trunc - p * m_r) / f;
    Ok(GammaMatrix::new(
        sigma * sigma * g11,
        sigma.powf(2.0 * rf) * g22,
        sigma.powf(rf + 1.0) * g12,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn default_lag_cube_root() {
        assert_eq!(default_lag(1_000_000), 100);
        assert_eq!(default_lag(999_999), 99);
        assert_eq!(default_lag(20_000), 27);
        assert_eq!(default_lag(10_000_000), 215);
    }

    #[test]
    fn gaussian_iid_gamma() {
        let g = InnovationDist::gaussian();
        let m = iid_gamma(&g, 0.5, 1).unwrap();
        assert!((m.g11 - PI / 2.0).abs() < 1e-12);
        assert!((m.g22 - (1.0 - 2.0 / PI)).abs() < 1e-12);
        assert!(m.g12.abs() < 1e-12);
        let m = iid_gamma(&g, 0.5, 2).unwrap();
        assert!((m.g22 - 2.0).abs() < 1e-12);
        assert!(m.g12.abs() < 1e-12);
        let m = iid_gamma(&g, 0.95, 2).unwrap();
        assert!((m.g12 - 1.644_853_626_951_472_2).abs() < 1e-9);
        assert!(iid_gamma(&InnovationDist::rademacher(), 0.5, 1).is_err());
    }

    #[test]
    fn scaled_iid_gamma() {
        let g = InnovationDist::gaussian();
        let base = iid_gamma(&g, 0.9, 2).unwrap();
        let s = iid_gamma_scaled(&g, 2.0, 0.9, 2).unwrap();
        assert!((s.g11 - 4.0 * base.g11).abs() < 1e-12);
        assert!((s.g22 - 16.0 * base.g22).abs() < 1e-12);
        assert!((s.g12 - 8.0 * base.g12).abs() < 1e-12);
    }

    #[test]
    fn assemble_examples() {
        let zero = TriCov {
            var_u: 0.0,
            var_v: 0.0,
            var_w: 0.0,
            cov_uv: 0.0,
            cov_uw: 0.0,
            cov_vw: 0.0,
            f_at_q: 1.0,
            q_p: 0.0,
            lag_l: 0,
            r: 1,
            p: 0.5,
        };
        assert_eq!(assemble_gamma(&zero, 0.3, 1), GammaMatrix::new(0.0, 0.0, 0.0));
        let unit = TriCov {
            var_u: 1.0,
            var_v: 1.0,
            var_w: 1.0,
            ..zero
        };
        let g = assemble_gamma(&unit, 0.0, 1);
        assert_eq!((g.g11, g.g22, g.g12), (1.0, 1.0, 0.0));
        let tc = TriCov {
            var_u: 1.0,
            var_v: 2.0,
            cov_uv: 0.5,
            ..zero
        };
        assert!((assemble_gamma(&tc, 1.0, 2).g22 - 4.0).abs() < 1e-15);
    }

    #[test]
    fn psd_flag() {
        assert!(GammaMatrix::new(1.0, 1.0, 2.0).warning.is_some());
        assert!(GammaMatrix::new(1.0, 1.0, 0.5).warning.is_none());
    }

    #[test]
    fn long_run_cov_rejects_large_lag() {
        let a = vec![0.0; 10];
        assert!(long_run_cov(&a, &a, 5).is_err());
        assert!(long_run_cov(&a, &a, 4).is_ok());
    }

    #[test]
    fn long_run_cov_symmetric_in_arguments() {
        let a: Vec<f64> = (0..500).map(|i| ((i * 37) % 11) as f64).collect();
        let b: Vec<f64> = (0..500).map(|i| ((i * 13) % 7) as f64 - (i % 3) as f64).collect();
        let ab = long_run_cov(&a, &b, 10).unwrap();
        let ba = long_run_cov(&b, &a, 10).unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }
}
