//! Innovation laws for `ε_t`: mean zero, unit variance, standardized
//! analytically from the distribution parameters.
//!
//! Besides sampling, each law exposes the closed-form quantities the rest of
//! the crate needs: absolute moments `E|ε|^q`, `E log ε²`, density, cdf,
//! quantile and truncated moments `E[|ε|^q ; ε ≤ z]`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use rand::distr::{Distribution, Uniform};
use rand::Rng;
use rand_distr::{StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal, StudentsT};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{digamma, gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::rng::{map_chunks, stream_rng, StreamRng};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationKind {
    Gaussian,
    /// Student-t with `nu` degrees of freedom, rescaled by `√((ν−2)/ν)`.
    StudentT {
        nu: f64,
    },
    Rademacher,
    /// Uniform on `[−√3, √3]`.
    UniformStandardized,
}

/// Distribution of the iid innovations. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnovationDist {
    kind: InnovationKind,
    descriptor: String,
}

/// A moment of the innovation law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Exact(f64),
    Estimated { value: f64, std_err: f64 },
    Infinite,
}

impl Moment {
    pub fn value(&self) -> f64 {
        match *self {
            Moment::Exact(v) => v,
            Moment::Estimated { value, .. } => value,
            Moment::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Moment::Infinite)
    }
}

impl InnovationDist {
    pub fn gaussian() -> Self {
        Self {
            kind: InnovationKind::Gaussian,
            descriptor: "gaussian".into(),
        }
    }

    pub fn student_t(nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 2.0) {
            return Err(Error::invalid(
                "nu",
                format!("standardized Student-t needs ν > 2, got {nu}"),
            ));
        }
        Ok(Self {
            kind: InnovationKind::StudentT { nu },
            descriptor: format!("student_t(nu={nu})"),
        })
    }

    pub fn rademacher() -> Self {
        Self {
            kind: InnovationKind::Rademacher,
            descriptor: "rademacher".into(),
        }
    }

    pub fn uniform() -> Self {
        Self {
            kind: InnovationKind::UniformStandardized,
            descriptor: "uniform_standardized".into(),
        }
    }

    /// Builds from a config name (`gaussian`, `student_t`, `rademacher`,
    /// `uniform`); `nu` is required for `student_t` only.
    pub fn from_name(name: &str, nu: Option<f64>) -> Result<Self> {
        match (name, nu) {
            ("gaussian" | "normal", None) => Ok(Self::gaussian()),
            ("rademacher", None) => Ok(Self::rademacher()),
            ("uniform" | "uniform_standardized", None) => Ok(Self::uniform()),
            ("student_t", Some(nu)) => Self::student_t(nu),
            ("student_t", None) => Err(Error::invalid("nu", "required for student_t")),
            (other, Some(_)) if other != "student_t" => {
                Err(Error::invalid("nu", format!("only valid for student_t, not `{other}`")))
            }
            (other, _) => Err(Error::invalid("innovation", format!("unknown distribution `{other}`"))),
        }
    }

    pub fn kind(&self) -> InnovationKind {
        self.kind
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// Every supported law is symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        true
    }

    /// Bounded support endpoints, if any.
    pub fn bounded_support(&self) -> Option<(f64, f64)> {
        match self.kind {
            InnovationKind::Rademacher => Some((-1.0, 1.0)),
            InnovationKind::UniformStandardized => Some((-SQRT_3, SQRT_3)),
            _ => None,
        }
    }

    /// Atoms of a discrete law, with equal weights.
    pub fn atoms(&self) -> Option<&'static [f64]> {
        match self.kind {
            InnovationKind::Rademacher => Some(&[-1.0, 1.0]),
            _ => None,
        }
    }

    pub fn has_density(&self) -> bool {
        !matches!(self.kind, InnovationKind::Rademacher)
    }

    fn t_scale(nu: f64) -> f64 {
        ((nu - 2.0) / nu).sqrt()
    }

    pub(crate) fn sampler(&self) -> Sampler {
        match self.kind {
            InnovationKind::Gaussian => Sampler::Gaussian,
            InnovationKind::StudentT { nu } => Sampler::StudentT {
                dist: StudentT::new(nu).expect("validated at construction"),
                scale: Self::t_scale(nu),
            },
            InnovationKind::Rademacher => Sampler::Rademacher,
            InnovationKind::UniformStandardized => {
                Sampler::Uniform(Uniform::new_inclusive(-SQRT_3, SQRT_3).expect("finite bounds"))
            }
        }
    }

    /// Fills `out` with iid draws from `rng`.
    pub fn fill(&self, rng: &mut StreamRng, out: &mut [f64]) {
        let s = self.sampler();
        for v in out.iter_mut() {
            *v = s.draw(rng);
        }
    }

    /// `E|ε|^q` for real `q ≥ 0`; `+∞` when the moment diverges.
    pub fn abs_moment(&self, q: f64) -> f64 {
        assert!(q >= 0.0, "absolute moment order must be non-negative");
        if q == 0.0 {
            return 1.0;
        }
        let even = even_integer(q);
        match self.kind {
            InnovationKind::Gaussian => match even {
                Some(k) => double_factorial_odd(k),
                None => (0.5 * q * 2f64.ln() + ln_gamma(0.5 * (q + 1.0))).exp() / PI.sqrt(),
            },
            InnovationKind::StudentT { nu } => {
                if q >= nu {
                    return f64::INFINITY;
                }
                match even {
                    // (ν−2)^{k/2} Π_{j≤k/2} (2j−1)/(ν−2j), grouped so k = 2 is exactly 1.
                    Some(k) => (1..=k / 2)
                        .map(|j| (nu - 2.0) * f64::from(2 * j - 1) / (nu - f64::from(2 * j)))
                        .product(),
                    None => {
                        let ln = 0.5 * q * (nu - 2.0).ln() + ln_gamma(0.5 * (q + 1.0)) + ln_gamma(0.5 * (nu - q))
                            - 0.5 * PI.ln()
                            - ln_gamma(0.5 * nu);
                        ln.exp()
                    }
                }
            }
            InnovationKind::Rademacher => 1.0,
            InnovationKind::UniformStandardized => 3f64.powf(0.5 * q) / (q + 1.0),
        }
    }

    /// `E log ε²`; `−∞` if the law puts mass at zero (none of ours do).
    pub fn log_square_mean(&self) -> f64 {
        let ln2 = 2f64.ln();
        match self.kind {
            InnovationKind::Gaussian => digamma(0.5) + ln2,
            InnovationKind::StudentT { nu } => digamma(0.5) - digamma(0.5 * nu) + nu.ln() + ((nu - 2.0) / nu).ln(),
            InnovationKind::Rademacher => 0.0,
            InnovationKind::UniformStandardized => 3f64.ln() - 2.0,
        }
    }

    /// Density at `x`. `None` for the discrete law.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        match self.kind {
            InnovationKind::Gaussian => Some((-0.5 * x * x).exp() / (2.0 * PI).sqrt()),
            InnovationKind::StudentT { nu } => {
                let s = Self::t_scale(nu);
                Some(students_t(nu).pdf(x / s) / s)
            }
            InnovationKind::Rademacher => None,
            InnovationKind::UniformStandardized => Some(if x.abs() <= SQRT_3 { 0.5 / SQRT_3 } else { 0.0 }),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            InnovationKind::Gaussian => 0.5 * statrs::function::erf::erfc(-x / SQRT_2),
            InnovationKind::StudentT { nu } => students_t(nu).cdf(x / Self::t_scale(nu)),
            InnovationKind::Rademacher => {
                if x < -1.0 {
                    0.0
                } else if x < 1.0 {
                    0.5
                } else {
                    1.0
                }
            }
            InnovationKind::UniformStandardized => ((x + SQRT_3) / (2.0 * SQRT_3)).clamp(0.0, 1.0),
        }
    }

    /// Quantile of order `p ∈ (0,1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        assert!(p > 0.0 && p < 1.0, "quantile order must lie in (0,1)");
        match self.kind {
            InnovationKind::Gaussian => Normal::standard().inverse_cdf(p),
            InnovationKind::StudentT { nu } => students_t(nu).inverse_cdf(p) * Self::t_scale(nu),
            InnovationKind::Rademacher => {
                if p <= 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            InnovationKind::UniformStandardized => -SQRT_3 + 2.0 * SQRT_3 * p,
        }
    }

    /// `E[ε ; ε ≤ z]`, the signed first moment truncated above at `z`.
    pub fn truncated_mean(&self, z: f64) -> f64 {
        match self.kind {
            InnovationKind::Gaussian => -self.pdf(z).unwrap(),
            InnovationKind::StudentT { nu } => {
                let s = Self::t_scale(nu);
                let zt = z / s;
                -s * (nu + zt * zt) / (nu - 1.0) * students_t(nu).pdf(zt)
            }
            InnovationKind::Rademacher => {
                if z < -1.0 {
                    0.0
                } else if z < 1.0 {
                    -0.5
                } else {
                    0.0
                }
            }
            InnovationKind::UniformStandardized => {
                let zc = z.clamp(-SQRT_3, SQRT_3);
                (zc * zc - 3.0) / (4.0 * SQRT_3)
            }
        }
    }

    /// `E[|ε|^q ; ε ≤ z]` for `q ≥ 0`; `+∞` when `E|ε|^q` diverges.
    pub fn truncated_abs_moment(&self, q: f64, z: f64) -> f64 {
        let total = self.abs_moment(q);
        if !total.is_finite() {
            return f64::INFINITY;
        }
        // P(|ε| ≤ a) weighted by |ε|^q, symmetric laws.
        let inner = |a: f64| -> f64 {
            if a <= 0.0 {
                return 0.0;
            }
            match self.kind {
                InnovationKind::Gaussian => total * gamma_lr(0.5 * (q + 1.0), 0.5 * a * a),
                InnovationKind::StudentT { nu } => {
                    let at = a / Self::t_scale(nu);
                    let x = at * at / (nu + at * at);
                    total * beta_reg(0.5 * (q + 1.0), 0.5 * (nu - q), x)
                }
                InnovationKind::Rademacher => {
                    if a >= 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                InnovationKind::UniformStandardized => {
                    let a = a.min(SQRT_3);
                    a.powf(q + 1.0) / ((q + 1.0) * SQRT_3)
                }
            }
        };
        if matches!(self.kind, InnovationKind::Rademacher) {
            // Atoms at ±1 with mass 1/2 each.
            return if z < -1.0 {
                0.0
            } else if z < 1.0 {
                0.5
            } else {
                1.0
            };
        }
        let half = 0.5 * total;
        if z >= 0.0 {
            half + 0.5 * inner(z)
        } else {
            half - 0.5 * inner(-z)
        }
    }
}

impl fmt::Display for InnovationDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor)
    }
}

fn students_t(nu: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, nu).expect("validated at construction")
}

fn even_integer(q: f64) -> Option<u32> {
    crate::numeric::as_integer(q).filter(|k| k % 2 == 0)
}

/// `(k−1)!!` for even `k`, i.e. the `k`-th standard normal moment.
fn double_factorial_odd(k: u32) -> f64 {
    (1..k).step_by(2).map(f64::from).product()
}

pub(crate) enum Sampler {
    Gaussian,
    StudentT { dist: StudentT<f64>, scale: f64 },
    Rademacher,
    Uniform(Uniform<f64>),
}

impl Sampler {
    #[inline]
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gaussian => StandardNormal.sample(rng),
            Sampler::StudentT { dist, scale } => dist.sample(rng) * scale,
            Sampler::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Sampler::Uniform(u) => u.sample(rng),
        }
    }
}

/// `n` iid innovations from stream 0 of `seed`.
pub fn sample_innovations(dist: &InnovationDist, n: usize, seed: u64) -> Vec<f64> {
    sample_innovations_stream(dist, n, seed, 0)
}

/// `n` iid innovations from stream `stream` of `seed`.
pub fn sample_innovations_stream(dist: &InnovationDist, n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    dist.fill(&mut stream_rng(seed, stream), &mut out);
    out
}

/// `E[ε^k]` for even `k ≥ 2`; odd orders vanish by symmetry.
pub fn innovation_moment(dist: &InnovationDist, k: u32) -> Moment {
    if k % 2 == 1 {
        return if dist.abs_moment(f64::from(k)).is_finite() {
            Moment::Exact(0.0)
        } else {
            Moment::Infinite
        };
    }
    let v = dist.abs_moment(f64::from(k));
    if v.is_finite() {
        Moment::Exact(v)
    } else {
        Moment::Infinite
    }
}

/// Monte Carlo estimate of `E[g(ε)]` with its standard error, drawn in
/// independent chunks so the result is thread-count invariant.
pub fn mc_expectation<G>(dist: &InnovationDist, draws: usize, seed: u64, g: G) -> (f64, f64)
where
    G: Fn(f64) -> f64 + Sync,
{
    let sampler = dist.sampler();
    let partial = map_chunks(draws, seed, |len, rng| {
        let mut s = crate::numeric::Neumaier::new();
        let mut s2 = crate::numeric::Neumaier::new();
        for _ in 0..len {
            let y = g(sampler.draw(rng));
            s.add(y);
            s2.add(y * y);
        }
        (s.total(), s2.total())
    });
    let n = draws as f64;
    let s = crate::numeric::sum(partial.iter().map(|p| p.0));
    let s2 = crate::numeric::sum(partial.iter().map(|p| p.1));
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo `E[ε^k]` as a [`Moment::Estimated`].
pub fn mc_moment(dist: &InnovationDist, k: u32, draws: usize, seed: u64) -> Moment {
    let (value, std_err) = mc_expectation(dist, draws, seed, |e| e.powi(k as i32));
    Moment::Estimated { value, std_err }
}
