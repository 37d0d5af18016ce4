use proptest::prelude::*;

use hyperbolic_pam::varopt::{self, chain_bound, f_eval, ha_mean_bound, l_star_relaxed, optimize_f, ModelParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn eps_star_is_scale_free(sigma2 in 0.05..20.0f64, d in 2usize..6) {
        let p = ModelParams::new(d, sigma2).unwrap();
        let sol = optimize_f(&p).unwrap();
        prop_assert_eq!(sol.eps_star, 0.2);
        prop_assert!((p.mu0().powi(2) - 2.0 * sigma2 * (d as f64 - 1.0)).abs() <= 1e-12 * p.mu0().powi(2));
        // Nothing on a coarse grid beats the optimum.
        for i in 1..40 {
            for j in 1..40 {
                let (e, k) = (i as f64 / 40.0, j as f64 / 10.0 * sol.k_star);
                prop_assert!(f_eval(e, k, &p).unwrap() <= sol.l_star + 1e-12);
            }
        }
    }

    #[test]
    fn relaxed_exponent_is_jointly_monotone(a1 in 0.1..1.0f64, a2 in 0.1..1.0f64, m1 in 1.0..3.0f64, m2 in 1.0..3.0f64) {
        let p = ModelParams::new(2, 1.0).unwrap();
        let (alo, ahi) = (a1.min(a2), a1.max(a2));
        let (mlo, mhi) = (m1.min(m2) * p.mu0(), m1.max(m2) * p.mu0());
        // Smaller α and larger μ can only increase L*(α,μ).
        prop_assert!(l_star_relaxed(alo, mhi, &p).unwrap() >= l_star_relaxed(ahi, mlo, &p).unwrap() - 1e-12);
    }

    #[test]
    fn chain_and_mean_bounds_hold(v in prop::collection::vec((0.01..100.0f64, 0.01..100.0f64), 1..12)) {
        let (d, u): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        prop_assert!(chain_bound(&d, &u).unwrap().holds);
        prop_assert!(ha_mean_bound(&d).unwrap().holds);
    }
}

#[test]
fn relaxed_exponent_converges_to_l_star() {
    for (d, s2) in [(2usize, 1.0), (3, 0.4), (4, 2.5)] {
        let p = ModelParams::new(d, s2).unwrap();
        let l = optimize_f(&p).unwrap().l_star;
        let near = l_star_relaxed(1.0 - 1e-4, p.mu0() * (1.0 + 1e-4), &p).unwrap();
        assert!((near - l).abs() <= 1e-3, "d = {d}: {near} vs {l}");
    }
}

#[test]
fn route_constants_enforce_ordering() {
    let p = ModelParams::new(2, 1.0).unwrap();
    // η above η_δ violates the cluster condition.
    let err = varopt::route_constants(20.0, 0.01, 15.0, 16.0, &p, 1.0).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let rc = varopt::route_constants(1.36, 0.01, 15.0, 16.0, &p, 1.0).unwrap();
    assert!(rc.lambda < rc.eta && rc.eta < rc.eta_delta);
    assert!((rc.n_eta - varopt::n_eta(1.36, p.mu0(), 16.0)).abs() < 1e-12);
}
