//! The sample quantile, the r-th absolute centred sample moment and the
//! linearisation residuals used as test oracles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::Neumaier;

/// Summary of both estimators on one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorResult {
    pub quantile_p: f64,
    pub q_hat: f64,
    pub r: u32,
    pub m_hat: f64,
    pub mean_hat: f64,
    pub n: usize,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::OutOfRange {
            what: "p",
            value: p,
            expected: "(0, 1]",
        });
    }
    Ok(())
}

fn check_r(r: u32) -> Result<()> {
    if r < 1 {
        return Err(Error::invalid("r", "must be at least 1"));
    }
    Ok(())
}

/// `⌈np⌉` clamped to `1..=n`. Products within 1e-9 of an integer count as
/// that integer so that e.g. `3 · (1/3)` selects the first order statistic.
pub fn order_index(n: usize, p: f64) -> usize {
    let np = n as f64 * p;
    let near = np.round();
    let k = if (np - near).abs() <= 1e-9 * near.max(1.0) {
        near
    } else {
        np.ceil()
    };
    (k as usize).clamp(1, n)
}

/// The `⌈np⌉`-th smallest element of `xs`, by selection.
pub fn sample_quantile(xs: &[f64], p: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_p(p)?;
    let mut buf = xs.to_vec();
    Ok(select_in_place(&mut buf, p))
}

/// [`sample_quantile`] reordering `buf` instead of copying it.
pub fn select_in_place(buf: &mut [f64], p: f64) -> f64 {
    let k = order_index(buf.len(), p);
    *buf.select_nth_unstable_by(k - 1, f64::total_cmp).1
}

#[inline]
fn abs_pow(d: f64, r: u32) -> f64 {
    match r {
        1 => d.abs(),
        2 => d * d,
        _ => d.abs().powi(r as i32),
    }
}

/// Compensated mean.
pub fn sample_mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(xs.iter().copied().collect::<Neumaier>().total() / xs.len() as f64)
}

/// `(1/n) Σ |X_i − c|^r` with `c` the sample mean, or `mu` when given.
pub fn centred_abs_moment(xs: &[f64], r: u32, mu: Option<f64>) -> Result<f64> {
    check_r(r)?;
    let c = match mu {
        Some(m) => m,
        None => sample_mean(xs)?,
    };
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let acc: Neumaier = xs.iter().map(|&x| abs_pow(x - c, r)).collect();
    Ok(acc.total() / xs.len() as f64)
}

/// Sample mean of `(x−μ)^{r−1} sgn(x−μ)^r`, with `sgn(0) = 0`.
pub fn signed_power_coeff(xs: &[f64], r: u32, mu: f64) -> Result<f64> {
    check_r(r)?;
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let acc: Neumaier = xs
        .iter()
        .map(|&x| {
            let d = x - mu;
            if d == 0.0 {
                0.0
            } else {
                let sign = if r % 2 == 1 { d.signum() } else { 1.0 };
                d.powi(r as i32 - 1) * sign
            }
        })
        .collect();
    Ok(acc.total() / xs.len() as f64)
}

/// Empirical cdf at `x`.
pub fn empirical_cdf(xs: &[f64], x: f64) -> f64 {
    xs.iter().filter(|&&v| v <= x).count() as f64 / xs.len() as f64
}

/// Bahadur remainder `q̂_n(p) − q − (p − F̂_n(q)) / f`.
pub fn bahadur_residual(xs: &[f64], p: f64, q_true: f64, f_at_q: f64) -> Result<f64> {
    if !(f_at_q > 0.0) {
        return Err(Error::NonPositiveDensity {
            at: q_true,
            estimate: f_at_q,
        });
    }
    let q_hat = sample_quantile(xs, p)?;
    Ok(q_hat - q_true - (p - empirical_cdf(xs, q_true)) / f_at_q)
}

/// `√n [m̂ − (1/n)Σ|X_i − μ|^r + (X̄_n − μ) a]` where `a` is the population
/// coefficient `r E[(X−μ)^{r−1} sgn(X−μ)^r]`.
pub fn moment_repr_residual(xs: &[f64], r: u32, mu: f64, a: f64) -> Result<f64> {
    let m_hat = centred_abs_moment(xs, r, None)?;
    let known = centred_abs_moment(xs, r, Some(mu))?;
    let mean = sample_mean(xs)?;
    Ok((xs.len() as f64).sqrt() * (m_hat - known + (mean - mu) * a))
}

/// Both estimators at once.
pub fn estimate(xs: &[f64], p: f64, r: u32) -> Result<EstimatorResult> {
    Ok(EstimatorResult {
        quantile_p: p,
        q_hat: sample_quantile(xs, p)?,
        r,
        m_hat: centred_abs_moment(xs, r, None)?,
        mean_hat: sample_mean(xs)?,
        n: xs.len(),
    })
}
