use augarch_core::model::{delta_dependent_path, simulate_path, Family, ModelSpec};
use augarch_core::InnovationDist;
use proptest::prelude::*;

fn gauss() -> InnovationDist {
    InnovationDist::gaussian()
}

#[test]
fn garch_is_apgarch_with_unit_delta_and_no_asymmetry() {
    let g = ModelSpec::garch(0.05, &[0.1], &[0.8]).unwrap();
    let a = ModelSpec::apgarch(1.0, 0.05, &[0.1], &[0.0], &[0.8]).unwrap();
    let pg = simulate_path(&g, &gauss(), 2_000, 500, 17).unwrap();
    let pa = simulate_path(&a, &gauss(), 2_000, 500, 17).unwrap();
    assert_eq!(pg.x, pa.x);
    assert_eq!(pg.sigma2, pa.sigma2);
}

#[test]
fn gjr_reparametrisation_matches_agarch() {
    let agarch = ModelSpec::new(Family::Agarch, 1, 1, None, 0.05, &[0.1], &[0.3], &[0.8]).unwrap();
    let gjr = ModelSpec::new(Family::GjrGarch, 1, 1, None, 0.05, &[0.1], &[0.3], &[0.8]).unwrap();
    for e in [-2.5, -1.0, -0.3, 0.0, 0.4, 1.7] {
        let a = agarch.eval_c(1, e).unwrap();
        let b = gjr.eval_c(1, e).unwrap();
        assert!((a - b).abs() < 1e-14, "ε = {e}: {a} vs {b}");
    }
}

#[test]
fn tgarch_is_apgarch_at_half_power() {
    let t = ModelSpec::new(Family::Tgarch, 1, 1, None, 0.05, &[0.1], &[0.3], &[0.8]).unwrap();
    let a = ModelSpec::apgarch(0.5, 0.05, &[0.1], &[0.3], &[0.8]).unwrap();
    for e in [-2.0, -0.5, 0.0, 0.5, 2.0] {
        assert!((t.eval_c(1, e).unwrap() - a.eval_c(1, e).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn paths_are_reproducible_and_seed_sensitive() {
    let s = ModelSpec::egarch(0.1, &[0.1], &[-0.05], &[0.9]).unwrap();
    let a = simulate_path(&s, &gauss(), 100, 50, 3).unwrap();
    let b = simulate_path(&s, &gauss(), 100, 50, 3).unwrap();
    let c = simulate_path(&s, &gauss(), 100, 50, 4).unwrap();
    assert_eq!(a.x, b.x);
    assert_ne!(a.x, c.x);
    assert!(a.sigma2.iter().all(|v| *v > 0.0));
}

#[test]
fn higher_order_models_run() {
    let s = ModelSpec::new(Family::Garch, 2, 3, None, 0.05, &[0.05, 0.03], &[], &[0.4, 0.2, 0.1]).unwrap();
    let p = simulate_path(&s, &gauss(), 5_000, 1_000, 8).unwrap();
    let var = p.x.iter().map(|x| x * x).sum::<f64>() / p.n() as f64;
    // Stationary variance ω / (1 − Σα − Σβ) = 0.05 / 0.22.
    assert!((var - 0.05 / 0.22).abs() < 0.05, "{var}");
}

#[test]
fn delta_gap_shrinks_for_garch() {
    let s = ModelSpec::garch(0.05, &[0.1], &[0.8]).unwrap();
    let full = simulate_path(&s, &gauss(), 3_000, 200, 5).unwrap();
    let gap = |d| {
        let a = delta_dependent_path(&s, &gauss(), 3_000, 200, d, 5).unwrap();
        (a.x.iter().zip(&full.x).map(|(u, v)| (u - v).powi(2)).sum::<f64>() / 3_000.0).sqrt()
    };
    let (g1, g10, g30) = (gap(1), gap(10), gap(30));
    assert!(g1 > g10 && g10 > g30 && g30 > 0.0, "{g1} {g10} {g30}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn delta_path_beyond_horizon_is_exact(seed in 0u64..1_000, n in 10usize..200, burn in 0usize..50) {
        let s = ModelSpec::new(Family::Ngarch, 1, 1, None, 0.05, &[0.1], &[0.2], &[0.7]).unwrap();
        let full = simulate_path(&s, &gauss(), n, burn, seed).unwrap();
        let approx = delta_dependent_path(&s, &gauss(), n, burn, n + burn + 1, seed).unwrap();
        prop_assert_eq!(full.x, approx.x);
    }

    #[test]
    fn admissible_garch_specs_simulate(omega in 0.01f64..1.0, a in 0.0f64..0.3, b in 0.0f64..0.6, seed in 0u64..100) {
        let s = ModelSpec::garch(omega, &[a], &[b]).unwrap();
        let p = simulate_path(&s, &gauss(), 200, 20, seed).unwrap();
        prop_assert!(p.sigma2.iter().all(|v| v.is_finite() && *v >= omega));
    }

    #[test]
    fn out_of_range_gamma_is_rejected(g in 1.0001f64..10.0) {
        prop_assert!(ModelSpec::new(Family::Agarch, 1, 1, None, 0.1, &[0.1], &[g], &[0.5]).is_err());
        prop_assert!(ModelSpec::new(Family::Agarch, 1, 1, None, 0.1, &[0.1], &[-g], &[0.5]).is_err());
    }
}
