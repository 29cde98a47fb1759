//! Augmented GARCH(p, q) models.
//!
//! Every family is expressed through the common recursion
//!
//! ```text
//! X_t = σ_t ε_t
//! Λ(σ_t²) = Σ_{i=1}^{p} g_i(ε_{t−i}) + Σ_{j=1}^{m} c_j(ε_{t−j}) Λ(σ²_{t−j}),   m = max(p, q)
//! ```
//!
//! with `Λ(x) = x^δ` (polynomial families) or `Λ(x) = log x` (MGARCH,
//! EGARCH). Coefficient vectors are zero-padded to length `m`.
//!
//! The family nesting is APGARCH ⊃ {AGARCH, PGARCH}; AGARCH ⊃ GJR-GARCH
//! (reparametrised) ⊃ GARCH ⊃ ARCH; APGARCH(δ = 1/2) = TGARCH ⊃ TSGARCH.
//! VGARCH and NGARCH are polynomial but outside the APGARCH family.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innovations::{sample_innovations_stream, InnovationDist};
use crate::numeric::format_sig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Apgarch,
    Agarch,
    GjrGarch,
    Garch,
    Arch,
    Tgarch,
    Tsgarch,
    Pgarch,
    Vgarch,
    Ngarch,
    Mgarch,
    Egarch,
}

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Apgarch,
        Family::Agarch,
        Family::GjrGarch,
        Family::Garch,
        Family::Arch,
        Family::Tgarch,
        Family::Tsgarch,
        Family::Pgarch,
        Family::Vgarch,
        Family::Ngarch,
        Family::Mgarch,
        Family::Egarch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Apgarch => "apgarch",
            Family::Agarch => "agarch",
            Family::GjrGarch => "gjr_garch",
            Family::Garch => "garch",
            Family::Arch => "arch",
            Family::Tgarch => "tgarch",
            Family::Tsgarch => "tsgarch",
            Family::Pgarch => "pgarch",
            Family::Vgarch => "vgarch",
            Family::Ngarch => "ngarch",
            Family::Mgarch => "mgarch",
            Family::Egarch => "egarch",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn is_exponential(self) -> bool {
        matches!(self, Family::Mgarch | Family::Egarch)
    }

    pub fn delta_is_free(self) -> bool {
        matches!(self, Family::Apgarch | Family::Pgarch)
    }

    /// The power `δ` fixed by the family, if any.
    pub fn fixed_delta(self) -> Option<f64> {
        match self {
            Family::Agarch | Family::GjrGarch | Family::Garch | Family::Arch | Family::Vgarch | Family::Ngarch => {
                Some(1.0)
            }
            Family::Tgarch | Family::Tsgarch => Some(0.5),
            _ => None,
        }
    }

    fn uses_gamma(self) -> bool {
        !matches!(
            self,
            Family::Garch | Family::Arch | Family::Tsgarch | Family::Pgarch | Family::Mgarch
        )
    }

    fn uses_beta(self) -> bool {
        !matches!(self, Family::Arch)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The transform `Λ` applied to `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "delta", rename_all = "snake_case")]
pub enum LambdaKind {
    Power(f64),
    Log,
}

impl LambdaKind {
    /// `Λ(x)` for `x > 0`.
    pub fn apply(self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::OutOfRange {
                what: "Λ argument",
                value: x,
                expected: "(0, ∞)",
            });
        }
        Ok(match self {
            LambdaKind::Power(d) => pow_pos(x, d),
            LambdaKind::Log => x.ln(),
        })
    }

    /// `Λ⁻¹(y)`; `y > 0` required for the power transform.
    pub fn invert(self, y: f64) -> Result<f64> {
        match self {
            LambdaKind::Power(d) => {
                if !(y > 0.0) {
                    return Err(Error::OutOfRange {
                        what: "Λ⁻¹ argument",
                        value: y,
                        expected: "(0, ∞)",
                    });
                }
                Ok(pow_pos(y, 1.0 / d))
            }
            LambdaKind::Log => Ok(y.exp()),
        }
    }

    pub fn delta(self) -> Option<f64> {
        match self {
            LambdaKind::Power(d) => Some(d),
            LambdaKind::Log => None,
        }
    }
}

/// `z^e` for `z ≥ 0`, exact for the exponents 1 and 2.
#[inline]
pub(crate) fn pow_pos(z: f64, e: f64) -> f64 {
    if e == 2.0 {
        z * z
    } else if e == 1.0 {
        z
    } else if e == 0.5 {
        z.sqrt()
    } else {
        z.powf(e)
    }
}

/// One augmented GARCH(p, q) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    family: Family,
    lambda: LambdaKind,
    p: usize,
    q: usize,
    omega: f64,
    alpha: Vec<f64>,
    gamma: Vec<f64>,
    beta: Vec<f64>,
}

impl ModelSpec {
    /// Validating constructor.
    ///
    /// `alpha` and `gamma` hold at most `p` entries, `beta` at most `q`;
    /// all are zero-padded to `max(p, q)`. `delta` must be given exactly for
    /// the free-power families (APGARCH, PGARCH). For PGARCH `δ` is the
    /// exponent of `Λ`, so the family's `σ^{2δ}` recursion carries
    /// `|ε|^{2δ}` in `c_j`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        family: Family,
        p: usize,
        q: usize,
        delta: Option<f64>,
        omega: f64,
        alpha: &[f64],
        gamma: &[f64],
        beta: &[f64],
    ) -> Result<Self> {
        if p < 1 {
            return Err(Error::invalid("p", "must be at least 1"));
        }
        let lambda = match (family.is_exponential(), family.delta_is_free(), delta) {
            (true, _, Some(_)) => {
                return Err(Error::invalid(
                    "delta",
                    format!("δ is not a free parameter for the log-Λ family {family}"),
                ))
            }
            (true, _, None) => LambdaKind::Log,
            (false, true, Some(d)) => {
                if !(d.is_finite() && d > 0.0) {
                    return Err(Error::invalid("delta", format!("must be > 0, got {d}")));
                }
                LambdaKind::Power(d)
            }
            (false, true, None) => return Err(Error::invalid("delta", format!("required for {family}"))),
            (false, false, Some(_)) => {
                return Err(Error::invalid(
                    "delta",
                    format!("δ is fixed by the {family} family and may not be set"),
                ))
            }
            (false, false, None) => LambdaKind::Power(family.fixed_delta().expect("fixed")),
        };
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid("omega", format!("must be > 0, got {omega}")));
        }
        check_len("alpha", alpha, p)?;
        check_len("gamma", gamma, p)?;
        check_len("beta", beta, q)?;
        for (i, &a) in alpha.iter().enumerate() {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::invalid(format!("alpha[{i}]"), format!("must be ≥ 0, got {a}")));
            }
        }
        for (i, &g) in gamma.iter().enumerate() {
            if !(g.is_finite() && (-1.0..=1.0).contains(&g)) {
                return Err(Error::invalid(
                    format!("gamma[{i}]"),
                    format!("must lie in [−1, 1], got {g}"),
                ));
            }
            if g != 0.0 && !family.uses_gamma() {
                return Err(Error::invalid(
                    format!("gamma[{i}]"),
                    format!("{family} has no asymmetry parameter"),
                ));
            }
        }
        for (j, &b) in beta.iter().enumerate() {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::invalid(format!("beta[{j}]"), format!("must be ≥ 0, got {b}")));
            }
            if b != 0.0 && !family.uses_beta() {
                return Err(Error::invalid(
                    format!("beta[{j}]"),
                    format!("{family} has no GARCH term"),
                ));
            }
        }
        let m = p.max(q);
        let pad = |v: &[f64]| {
            let mut out = v.to_vec();
            out.resize(m, 0.0);
            out
        };
        Ok(Self {
            family,
            lambda,
            p,
            q,
            omega,
            alpha: pad(alpha),
            gamma: pad(gamma),
            beta: pad(beta),
        })
    }

    pub fn garch(omega: f64, alpha: &[f64], beta: &[f64]) -> Result<Self> {
        Self::new(
            Family::Garch,
            alpha.len().max(1),
            beta.len(),
            None,
            omega,
            alpha,
            &[],
            beta,
        )
    }

    pub fn arch(omega: f64, alpha: &[f64]) -> Result<Self> {
        Self::new(Family::Arch, alpha.len().max(1), 0, None, omega, alpha, &[], &[])
    }

    pub fn apgarch(delta: f64, omega: f64, alpha: &[f64], gamma: &[f64], beta: &[f64]) -> Result<Self> {
        let p = alpha.len().max(gamma.len()).max(1);
        Self::new(Family::Apgarch, p, beta.len(), Some(delta), omega, alpha, gamma, beta)
    }

    pub fn egarch(omega: f64, alpha: &[f64], gamma: &[f64], beta: &[f64]) -> Result<Self> {
        let p = alpha.len().max(gamma.len()).max(1);
        Self::new(Family::Egarch, p, beta.len(), None, omega, alpha, gamma, beta)
    }

    pub fn mgarch(omega: f64, alpha: &[f64], beta: &[f64]) -> Result<Self> {
        Self::new(
            Family::Mgarch,
            alpha.len().max(1),
            beta.len(),
            None,
            omega,
            alpha,
            &[],
            beta,
        )
    }

    pub fn family(&self) -> Family {
        self.family
    }
    pub fn lambda(&self) -> LambdaKind {
        self.lambda
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn q(&self) -> usize {
        self.q
    }
    /// `max(p, q)`, the number of `c_j` terms.
    pub fn max_lag(&self) -> usize {
        self.alpha.len()
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `g_i(ε)`, `1 ≤ i ≤ p`.
    pub fn eval_g(&self, i: usize, eps: f64, dist: &InnovationDist) -> Result<f64> {
        if i < 1 || i > self.p {
            return Err(Error::IndexOutOfRange {
                what: "g_i",
                index: i,
                max: self.p,
            });
        }
        Ok(self.kernel(dist).g(i - 1, eps))
    }

    /// `c_j(ε)`, `1 ≤ j ≤ max(p, q)`.
    pub fn eval_c(&self, j: usize, eps: f64) -> Result<f64> {
        if j < 1 || j > self.max_lag() {
            return Err(Error::IndexOutOfRange {
                what: "c_j",
                index: j,
                max: self.max_lag(),
            });
        }
        // c_j never involves distribution constants.
        Ok(Kernel::with_abs_mean(self, 0.0).c(j - 1, eps))
    }

    /// Precomputed evaluator for hot loops.
    pub fn kernel(&self, dist: &InnovationDist) -> Kernel {
        let abs_mean = if self.family == Family::Egarch {
            dist.abs_moment(1.0)
        } else {
            0.0
        };
        Kernel::with_abs_mean(self, abs_mean)
    }

    /// `E c_j(ε)` for each lag, from closed-form innovation moments.
    pub fn mean_c(&self, dist: &InnovationDist) -> Vec<f64> {
        let e2 = dist.abs_moment(2.0);
        let e1 = dist.abs_moment(1.0);
        (0..self.max_lag())
            .map(|j| {
                let (a, g, b) = (self.alpha[j], self.gamma[j], self.beta[j]);
                match self.family {
                    Family::Apgarch | Family::Agarch | Family::Pgarch => {
                        let e = self.power_exponent();
                        let asym = if matches!(self.family, Family::Pgarch) {
                            // |ε|^{2δ}: the γ = 0 case of the same expression.
                            0.5 * dist.abs_moment(e) * (1.0 + 1.0)
                        } else {
                            0.5 * dist.abs_moment(e) * (pow_pos(1.0 - g, e) + pow_pos(1.0 + g, e))
                        };
                        a * asym + b
                    }
                    Family::GjrGarch => {
                        let (a_star, g_star) = gjr_star(a, g);
                        b + a_star * e2 + g_star * 0.5 * e2
                    }
                    Family::Garch => a * e2 + b,
                    Family::Arch => a * e2,
                    Family::Tgarch => {
                        let (plus, minus) = tgarch_pm(a, g);
                        (plus + minus) * 0.5 * e1 + b
                    }
                    Family::Tsgarch => a * e1 + b,
                    Family::Ngarch => a * (e2 + g * g) + b,
                    Family::Vgarch | Family::Mgarch | Family::Egarch => b,
                }
            })
            .collect()
    }

    /// `E g_i(ε)` for each `i ≤ p`.
    pub fn mean_g(&self, dist: &InnovationDist) -> Vec<f64> {
        let share = self.omega / self.p as f64;
        (0..self.p)
            .map(|i| match self.family {
                Family::Vgarch => share + self.alpha[i] * (dist.abs_moment(2.0) + self.gamma[i].powi(2)),
                Family::Mgarch => share + self.alpha[i] * dist.log_square_mean(),
                _ => share,
            })
            .collect()
    }

    /// Unconditional mean of `Λ(σ²)` when the first-moment contraction
    /// `Σ E c_j < 1` holds.
    pub fn lambda_mean(&self, dist: &InnovationDist) -> Option<f64> {
        let sg: f64 = self.mean_g(dist).iter().sum();
        let sc: f64 = self.mean_c(dist).iter().sum();
        (sg.is_finite() && sc.is_finite() && sc < 1.0).then(|| sg / (1.0 - sc))
    }

    /// Starting value for `Λ(σ²)`: the unconditional mean, else `ω`.
    pub fn initial_lambda(&self, dist: &InnovationDist) -> f64 {
        self.lambda_mean(dist).unwrap_or(self.omega)
    }

    /// `2δ`, the power applied to the news term of the APGARCH family.
    fn power_exponent(&self) -> f64 {
        2.0 * self.lambda.delta().unwrap_or(1.0)
    }

    /// `Some(σ²)` when the volatility is constant: every `c_j ≡ 0` and every
    /// `g_i` is constant.
    pub fn constant_sigma2(&self) -> Option<f64> {
        let zero = |v: &[f64]| v.iter().all(|&x| x == 0.0);
        let const_g = match self.family {
            Family::Vgarch | Family::Mgarch => zero(&self.alpha),
            Family::Egarch => zero(&self.alpha) && zero(&self.gamma),
            _ => true,
        };
        let zero_c = match self.family {
            Family::Vgarch | Family::Mgarch | Family::Egarch => zero(&self.beta),
            _ => zero(&self.alpha) && zero(&self.beta),
        };
        if const_g && zero_c {
            self.lambda.invert(self.omega).ok()
        } else {
            None
        }
    }
}

fn check_len(name: &str, v: &[f64], max: usize) -> Result<()> {
    if v.len() > max {
        return Err(Error::invalid(
            name,
            format!("has {} entries but the order allows at most {max}", v.len()),
        ));
    }
    Ok(())
}

/// GJR parameters `α* = α(1−γ)²`, `γ* = 4αγ`.
pub fn gjr_star(alpha: f64, gamma: f64) -> (f64, f64) {
    (alpha * (1.0 - gamma).powi(2), 4.0 * alpha * gamma)
}

/// TGARCH parameters `α⁺ = α(1−γ)`, `α⁻ = α(1+γ)`.
pub fn tgarch_pm(alpha: f64, gamma: f64) -> (f64, f64) {
    (alpha * (1.0 - gamma), alpha * (1.0 + gamma))
}

/// Evaluator of `g_i` and `c_j` with distribution constants resolved.
#[derive(Debug, Clone)]
pub struct Kernel {
    family: Family,
    p: usize,
    omega_share: f64,
    exponent: f64,
    abs_mean: f64,
    alpha: Vec<f64>,
    gamma: Vec<f64>,
    beta: Vec<f64>,
    star: Vec<(f64, f64)>,
}

impl Kernel {
    fn with_abs_mean(spec: &ModelSpec, abs_mean: f64) -> Self {
        let star = (0..spec.max_lag())
            .map(|j| match spec.family {
                Family::GjrGarch => gjr_star(spec.alpha[j], spec.gamma[j]),
                Family::Tgarch => tgarch_pm(spec.alpha[j], spec.gamma[j]),
                _ => (0.0, 0.0),
            })
            .collect();
        Self {
            family: spec.family,
            p: spec.p,
            omega_share: spec.omega / spec.p as f64,
            exponent: spec.power_exponent(),
            abs_mean,
            alpha: spec.alpha.clone(),
            gamma: spec.gamma.clone(),
            beta: spec.beta.clone(),
            star,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn max_lag(&self) -> usize {
        self.alpha.len()
    }

    /// `g_{i+1}(ε)` (zero-based `i`).
    #[inline]
    pub fn g(&self, i: usize, eps: f64) -> f64 {
        match self.family {
            Family::Vgarch => {
                let z = eps + self.gamma[i];
                self.omega_share + self.alpha[i] * (z * z)
            }
            Family::Mgarch => self.omega_share + self.alpha[i] * (eps * eps).ln(),
            Family::Egarch => self.omega_share + self.alpha[i] * (eps.abs() - self.abs_mean) + self.gamma[i] * eps,
            _ => self.omega_share,
        }
    }

    /// `c_{j+1}(ε)` (zero-based `j`).
    #[inline]
    pub fn c(&self, j: usize, eps: f64) -> f64 {
        let (a, b) = (self.alpha[j], self.beta[j]);
        match self.family {
            Family::Apgarch | Family::Agarch => a * pow_pos(eps.abs() - self.gamma[j] * eps, self.exponent) + b,
            Family::Pgarch => a * pow_pos(eps.abs(), self.exponent) + b,
            Family::GjrGarch => {
                let (a_star, g_star) = self.star[j];
                let neg = (-eps).max(0.0);
                b + a_star * (eps * eps) + g_star * (neg * neg)
            }
            Family::Garch => a * (eps * eps) + b,
            Family::Arch => a * (eps * eps),
            Family::Tgarch => {
                let (plus, minus) = self.star[j];
                plus * eps.max(0.0) - minus * eps.min(0.0) + b
            }
            Family::Tsgarch => a * eps.abs() + b,
            Family::Ngarch => {
                let z = eps + self.gamma[j];
                a * (z * z) + b
            }
            Family::Vgarch | Family::Mgarch | Family::Egarch => b,
        }
    }

    /// One recursion step: `Λ_s` from lagged innovations and states.
    /// `eps_lag(k)` and `lam_lag(k)` return the values `k ≥ 1` steps back.
    #[inline]
    fn step(&self, eps_lag: impl Fn(usize) -> f64, lam_lag: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.p {
            acc += self.g(i, eps_lag(i + 1));
        }
        for j in 0..self.max_lag() {
            acc += self.c(j, eps_lag(j + 1)) * lam_lag(j + 1);
        }
        acc
    }
}

/// A simulated realisation with its provenance.
#[derive(Debug, Clone)]
pub struct Path {
    pub x: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub burn_in: usize,
    pub seed: u64,
    pub stream: u64,
    pub spec: ModelSpec,
}

impl Path {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// CSV with header `t,x,sigma2`, `t` starting at 1, numbers printed with
    /// `digits` significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W, digits: usize) -> std::io::Result<()> {
        writeln!(w, "t,x,sigma2")?;
        for (t, (x, s)) in self.x.iter().zip(&self.sigma2).enumerate() {
            writeln!(w, "{},{},{}", t + 1, format_sig(*x, digits), format_sig(*s, digits))?;
        }
        Ok(())
    }
}

pub const DEFAULT_BURN_IN: usize = 5_000;

fn check_state(lambda: LambdaKind, step: usize, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::Overflow { step, value });
    }
    if matches!(lambda, LambdaKind::Power(_)) && value <= 0.0 {
        return Err(Error::Domain { step, value });
    }
    Ok(())
}

fn to_sigma2(lambda: LambdaKind, step: usize, value: f64) -> Result<f64> {
    let s2 = lambda.invert(value).map_err(|_| Error::Domain { step, value })?;
    if !s2.is_finite() {
        return Err(Error::Overflow { step, value });
    }
    if s2 <= 0.0 {
        return Err(Error::Domain { step, value });
    }
    Ok(s2)
}

/// Runs the recursion over `eps[0..]`, the first `m` states set to `init`.
fn run_recursion(kernel: &Kernel, lambda: LambdaKind, eps: &[f64], init: f64, lam: &mut [f64]) -> Result<()> {
    let m = kernel.max_lag();
    for (s, slot) in lam.iter_mut().enumerate().take(m) {
        check_state(lambda, s, init)?;
        *slot = init;
    }
    for s in m..lam.len() {
        let v = kernel.step(|k| eps[s - k], |k| lam[s - k]);
        check_state(lambda, s, v)?;
        lam[s] = v;
    }
    Ok(())
}

/// Simulates `burn_in + n` steps from stream 0 of `seed` and keeps the last
/// `n`.
pub fn simulate_path(spec: &ModelSpec, dist: &InnovationDist, n: usize, burn_in: usize, seed: u64) -> Result<Path> {
    simulate_path_stream(spec, dist, n, burn_in, seed, 0)
}

/// [`simulate_path`] on an explicit stream.
pub fn simulate_path_stream(
    spec: &ModelSpec,
    dist: &InnovationDist,
    n: usize,
    burn_in: usize,
    seed: u64,
    stream: u64,
) -> Result<Path> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let total = burn_in + n;
    let mut eps = sample_innovations_stream(dist, total, seed, stream);
    let kernel = spec.kernel(dist);
    let lambda = spec.lambda();
    let mut lam = vec![0.0; total];
    run_recursion(&kernel, lambda, &eps, spec.initial_lambda(dist), &mut lam)?;
    // Reuse the buffers: lam → σ², eps → x.
    for (s, (l, e)) in lam.iter_mut().zip(eps.iter_mut()).enumerate() {
        let s2 = to_sigma2(lambda, s, *l)?;
        *l = s2;
        *e *= s2.sqrt();
    }
    lam.drain(..burn_in);
    eps.drain(..burn_in);
    Ok(Path {
        x: eps,
        sigma2: lam,
        burn_in,
        seed,
        stream,
        spec: spec.clone(),
    })
}

/// Δ-dependent coupling of [`simulate_path`]: `X_t^{(Δ)}` restarts the
/// recursion at index `t − Δ` from the initial state and only sees
/// `ε_{t−Δ}, …, ε_t`. The innovation stream is the one `simulate_path`
/// uses with the same `(seed, burn_in, n)`. Restarts before the start of the
/// simulation are clipped to it, so `Δ ≥ burn_in + n` reproduces the full
/// path exactly.
pub fn delta_dependent_path(
    spec: &ModelSpec,
    dist: &InnovationDist,
    n: usize,
    burn_in: usize,
    delta: usize,
    seed: u64,
) -> Result<Path> {
    delta_dependent_path_stream(spec, dist, n, burn_in, delta, seed, 0)
}

pub fn delta_dependent_path_stream(
    spec: &ModelSpec,
    dist: &InnovationDist,
    n: usize,
    burn_in: usize,
    delta: usize,
    seed: u64,
    stream: u64,
) -> Result<Path> {
    if delta < 1 {
        return Err(Error::invalid("delta", "Δ must be at least 1"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let total = burn_in + n;
    let eps = sample_innovations_stream(dist, total, seed, stream);
    let kernel = spec.kernel(dist);
    let lambda = spec.lambda();
    let init = spec.initial_lambda(dist);
    let mut x = Vec::with_capacity(n);
    let mut sigma2 = Vec::with_capacity(n);
    let mut scratch = Vec::with_capacity(delta + 1);
    for t in burn_in..total {
        let start = t.saturating_sub(delta);
        scratch.clear();
        scratch.resize(t - start + 1, 0.0);
        run_recursion(&kernel, lambda, &eps[start..=t], init, &mut scratch).map_err(|e| shift_step(e, start))?;
        let s2 = to_sigma2(lambda, t, *scratch.last().expect("non-empty window"))?;
        sigma2.push(s2);
        x.push(s2.sqrt() * eps[t]);
    }
    Ok(Path {
        x,
        sigma2,
        burn_in,
        seed,
        stream,
        spec: spec.clone(),
    })
}

fn shift_step(e: Error, offset: usize) -> Error {
    match e {
        Error::Overflow { step, value } => Error::Overflow {
            step: step + offset,
            value,
        },
        Error::Domain { step, value } => Error::Domain {
            step: step + offset,
            value,
        },
        other => other,
    }
}
