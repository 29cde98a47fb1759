//! Small numeric helpers shared by the estimators and the harness.

use serde::Serialize;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().collect::<Neumaier>().total()
}

/// Compensated arithmetic mean. Returns NaN for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    sum(xs.iter().copied()) / xs.len() as f64
}

/// Ordinary least squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Returns `None` with fewer than two points or zero spread in `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx = sum(x.iter().map(|a| (a - mx) * (a - mx)));
    let sxy = sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let syy = sum(y.iter().map(|b| (b - my) * (b - my)));
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Binomial coefficient as a float; exact for the small orders used here.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc.round()
}

/// `x` is an integer (within a relative 1e-12).
pub fn as_integer(x: f64) -> Option<u32> {
    let r = x.round();
    if r >= 0.0 && (x - r).abs() <= 1e-12 * r.max(1.0) && r <= f64::from(u32::MAX) {
        Some(r as u32)
    } else {
        None
    }
}

/// Scientific notation with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.max(1) - 1, x)
}

/// Anderson–Darling normality statistic with estimated mean and variance.
///
/// Returns the raw `A²` statistic and the 1% critical value adjusted for
/// sample size (D'Agostino–Stephens table, `n`-corrected as in SciPy).
pub fn anderson_darling_normal(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 8, "Anderson–Darling needs at least 8 observations");
    let m = mean(xs);
    let var = sum(xs.iter().map(|x| (x - m) * (x - m))) / (n as f64 - 1.0);
    let sd = var.sqrt();
    let mut z: Vec<f64> = xs.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let nf = n as f64;
    let log_cdf = |x: f64| (0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)).ln();
    let log_sf = |x: f64| (0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)).ln();
    let s = sum((0..n).map(|i| {
        let w = (2 * i + 1) as f64;
        w * (log_cdf(z[i]) + log_sf(z[n - 1 - i]))
    }));
    let a2 = -nf - s / nf;
    let critical_1pct = 1.092 / (1.0 + 4.0 / nf - 25.0 / (nf * nf));
    (a2, critical_1pct)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(xs), 2.0);
        assert_ne!(xs.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn linear_fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn binomial_small_table() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(3, 5), 0.0);
    }

    #[test]
    fn integer_detection() {
        assert_eq!(as_integer(2.0), Some(2));
        assert_eq!(as_integer(4.0 / 3.0), None);
        assert_eq!(as_integer(-1.0), None);
    }
}
