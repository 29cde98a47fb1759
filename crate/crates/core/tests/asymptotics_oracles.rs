use augarch_core::asymptotics::{
    abs_autocov_sum, assemble_gamma, density_sensitivity, estimate_density_at_quantile, estimate_tricov, iid_gamma,
    long_run_cov, long_run_cov_matrix,
};
use augarch_core::model::{simulate_path, ModelSpec};
use augarch_core::rng::stream_rng;
use augarch_core::{sample_innovations, InnovationDist};
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Reference law with its own density, written independently of the crate.
enum Law {
    Normal,
    T(f64),
    Uniform,
}

impl Law {
    /// `∫_{lo}^{hi} h(x) f(x) dx`, split at 0 so `|x|^r` kinks sit on nodes.
    fn integrate(&self, h: &dyn Fn(f64) -> f64, hi: f64) -> f64 {
        let piece = |a: f64, b: f64| -> f64 {
            if b <= a {
                return 0.0;
            }
            match self {
                Law::Normal => simpson(|x| h(x) * (-0.5 * x * x).exp() / (2.0 * PI).sqrt(), a, b, 400_000),
                Law::Uniform => simpson(|x| h(x) / (2.0 * 3f64.sqrt()), a, b, 2_000),
                Law::T(nu) => {
                    // x = s tan θ removes the infinite range.
                    let s = ((nu - 2.0) / nu).sqrt();
                    let c = (ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0)).exp() / (nu * PI).sqrt();
                    let dens = |y: f64| c * (1.0 + y * y / nu).powf(-(nu + 1.0) / 2.0);
                    let (ta, tb) = ((a / s).atan(), (b / s).atan());
                    simpson(
                        |t: f64| {
                            let ct = t.cos();
                            if ct <= 0.0 {
                                return 0.0;
                            }
                            let y = t.tan();
                            h(s * y) * dens(y) / (ct * ct)
                        },
                        ta,
                        tb,
                        400_000,
                    )
                }
            }
        };
        let lo = match self {
            Law::Normal => -40.0,
            Law::Uniform => -3f64.sqrt(),
            Law::T(_) => f64::NEG_INFINITY,
        };
        let hi = match self {
            Law::Uniform => hi.min(3f64.sqrt()),
            Law::Normal => hi.min(40.0),
            Law::T(_) => hi,
        };
        let mid = 0f64.min(hi);
        piece(lo, mid) + piece(mid, hi)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.integrate(&|_| 1.0, x)
    }

    fn quantile(&self, p: f64) -> f64 {
        let (mut a, mut b) = (-10.0, 10.0);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if self.cdf(m) < p {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    fn pdf(&self, x: f64) -> f64 {
        let h = 1e-4;
        (self.cdf(x + h) - self.cdf(x - h)) / (2.0 * h)
    }
}

/// Quadrature oracle for the iid Γ of a symmetric law.
fn quadrature_gamma(law: &Law, p: f64, r: u32) -> (f64, f64, f64) {
    let rf = r as f64;
    let q = law.quantile(p);
    let f = law.pdf(q);
    let inf = f64::INFINITY;
    let m_r = law.integrate(&|x: f64| x.abs().powf(rf), inf);
    let m_2r = law.integrate(&|x: f64| x.abs().powf(2.0 * rf), inf);
    let trunc = law.integrate(&|x: f64| x.abs().powf(rf), q);
    (p * (1.0 - p) / (f * f), m_2r - m_r * m_r, -(trunc - p * m_r) / f)
}

#[test]
fn iid_gamma_matches_quadrature() {
    let cases = [
        (Law::Normal, InnovationDist::gaussian()),
        (Law::T(10.0), InnovationDist::student_t(10.0).unwrap()),
        (Law::Uniform, InnovationDist::uniform()),
    ];
    for (law, dist) in cases {
        for p in [0.5, 0.8, 0.95] {
            for r in [1u32, 2] {
                let g = iid_gamma(&dist, p, r).unwrap();
                let (g11, g22, g12) = quadrature_gamma(&law, p, r);
                let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs().max(1.0);
                assert!(close(g.g11, g11), "{dist} p={p} r={r}: g11 {} vs {g11}", g.g11);
                assert!(close(g.g22, g22), "{dist} p={p} r={r}: g22 {} vs {g22}", g.g22);
                assert!(close(g.g12, g12), "{dist} p={p} r={r}: g12 {} vs {g12}", g.g12);
            }
        }
    }
}

#[test]
fn gaussian_iid_gamma_known_values() {
    let g = InnovationDist::gaussian();
    let m = iid_gamma(&g, 0.5, 1).unwrap();
    assert!((m.g11 - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((m.g22 - 0.363_380_227_632_418_4).abs() < 1e-12);
    assert!((iid_gamma(&g, 0.95, 2).unwrap().g12 - 1.644_853_626_951_472).abs() < 1e-9);
}

#[test]
fn kde_at_gaussian_quantiles() {
    let xs = sample_innovations(&InnovationDist::gaussian(), 1_000_000, 101);
    let med = estimate_density_at_quantile(&xs, 0.5, None).unwrap();
    assert!((med.f_at_q / (1.0 / (2.0 * PI).sqrt()) - 1.0).abs() < 0.02, "{med:?}");
    let tail = estimate_density_at_quantile(&xs, 0.95, None).unwrap();
    assert!((tail.f_at_q / 0.103_135_892_7 - 1.0).abs() < 0.03, "{tail:?}");
    let sens = density_sensitivity(&xs, 0.5).unwrap();
    assert!(sens.iter().all(|d| (d.f_at_q - 0.39894).abs() < 0.02));
}

#[test]
fn kde_at_student_t_median() {
    let xs = sample_innovations(&InnovationDist::student_t(5.0).unwrap(), 1_000_000, 102);
    let d = estimate_density_at_quantile(&xs, 0.5, None).unwrap();
    // t₅ density at 0 times √(5/3).
    let exact = (ln_gamma(3.0) - ln_gamma(2.5)).exp() / (5.0 * PI).sqrt() * (5.0f64 / 3.0).sqrt();
    assert!((d.f_at_q / exact - 1.0).abs() < 0.02, "{} vs {exact}", d.f_at_q);
    assert!(estimate_density_at_quantile(&xs[..50], 0.5, None).is_err());
}

fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0);
    let mut x = 0.0;
    (0..n + 1000)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            x = phi * x + e;
            x
        })
        .skip(1000)
        .collect()
}

fn ma1(n: usize, theta: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0);
    let e: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(&mut rng)).collect();
    (1..=n).map(|t| e[t] + theta * e[t - 1]).collect()
}

#[test]
fn long_run_variance_of_ar1_and_ma1() {
    let a = ar1(1_000_000, 0.5, 7);
    let lr = long_run_cov(&a, &a, 200).unwrap();
    assert!((lr / 4.0 - 1.0).abs() < 0.05, "{lr}");
    let m = ma1(1_000_000, 0.5, 8);
    let lr = long_run_cov(&m, &m, 50).unwrap();
    assert!((lr / 2.25 - 1.0).abs() < 0.05, "{lr}");
}

#[test]
fn long_run_of_iid_is_variance() {
    let xs = sample_innovations(&InnovationDist::gaussian(), 200_000, 9);
    let lr = long_run_cov(&xs, &xs, 20).unwrap();
    assert!((lr - 1.0).abs() < 0.03, "{lr}");
    let m = long_run_cov_matrix(&[&xs, &xs], 20).unwrap();
    assert_eq!(m[0][1], m[1][0]);
}

#[test]
fn tricov_of_iid_gaussian() {
    let xs = sample_innovations(&InnovationDist::gaussian(), 1_000_000, 31);
    let tc = estimate_tricov(&xs, 0.5, 1, None).unwrap();
    assert!((tc.var_w / (PI / 2.0) - 1.0).abs() < 0.05, "{tc:?}");
    assert!(tc.cov_uv.abs() < 0.01 && tc.cov_vw.abs() < 0.02, "{tc:?}");
    assert!(tc.is_psd());
    let tc2 = estimate_tricov(&xs, 0.5, 2, None).unwrap();
    assert!((tc2.var_v / 2.0 - 1.0).abs() < 0.05, "{tc2:?}");
    let g = assemble_gamma(&tc, 0.0, 1);
    let exact = iid_gamma(&InnovationDist::gaussian(), 0.5, 1).unwrap();
    assert!((g.g11 / exact.g11 - 1.0).abs() < 0.05);
    assert!((g.g22 / exact.g22 - 1.0).abs() < 0.05);
}

#[test]
fn garch_squares_have_positive_long_run_excess() {
    let s = ModelSpec::garch(0.05, &[0.1], &[0.8]).unwrap();
    let path = simulate_path(&s, &InnovationDist::gaussian(), 400_000, 5_000, 12).unwrap();
    let tc = estimate_tricov(&path.x, 0.95, 2, None).unwrap();
    let sq: Vec<f64> = path.x.iter().map(|x| x * x).collect();
    let m = sq.iter().sum::<f64>() / sq.len() as f64;
    let marginal = sq.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / sq.len() as f64;
    assert!(tc.var_v > 1.5 * marginal, "{} vs {marginal}", tc.var_v);
    assert!(tc.is_psd());
}

#[test]
fn absolute_autocovariances_converge() {
    let s = ModelSpec::garch(0.05, &[0.1], &[0.8]).unwrap();
    let path = simulate_path(&s, &InnovationDist::gaussian(), 400_000, 5_000, 13).unwrap();
    let w: Vec<f64> = path.x.iter().map(|x| x * x).collect();
    let a100 = abs_autocov_sum(&w, 100).unwrap();
    let a200 = abs_autocov_sum(&w, 200).unwrap();
    assert!(a200 >= a100);
    // Beyond lag 100 only noise of order 1/√n per lag remains.
    assert!(a200 - a100 < 0.2 * a100, "{a100} {a200}");
}
