use std::sync::Arc;

use proptest::prelude::*;

use hyperbolic_pam::fkmc::{
    self, reduce_word, route_extract, staying_excursion_split, ConstantPotential, PlantedPeak, Potential,
};
use hyperbolic_pam::gaussfield::{build_clusters, detect_islands, make_spec, BumpShape, ClusterSet, LazyField};
use hyperbolic_pam::hypbm::Trajectory;
use hyperbolic_pam::hypgeo::HPoint;
use hyperbolic_pam::rng;
use hyperbolic_pam::stats::MeanVar;
use hyperbolic_pam::varopt::{self, l_star_relaxed, ModelParams};

fn on_axis(rs: &[f64]) -> Trajectory {
    let n = rs.len() - 1;
    Trajectory {
        times: (0..=n).map(|i| i as f64 / n as f64).collect(),
        points: rs.iter().map(|&r| HPoint::polar(r, &[1.0, 0.0])).collect(),
    }
}

fn two_clusters() -> ClusterSet {
    let a = vec![HPoint::polar(1.0, &[1.0, 0.0])];
    let b = vec![HPoint::polar(3.0, &[1.0, 0.0])];
    ClusterSet::from_point_sets(vec![a, b], 0.1).unwrap()
}

// With t = 1 and λ = 0.4 the exit neighbourhood has radius 0.2.
const LAMBDA: f64 = 0.4;

#[test]
fn repeated_visit_gives_aa() {
    let tr = on_axis(&[0.0, 1.0, 1.05, 1.6, 1.0, 1.6, 2.0]);
    let r = route_extract(&tr, &two_clusters(), LAMBDA, 1.0);
    assert_eq!(r.word, vec![0, 0]);
    assert_eq!(r.sigma, vec![1.0 / 6.0, 4.0 / 6.0]);
    assert_eq!(r.tau, vec![3.0 / 6.0, 5.0 / 6.0]);
    assert_eq!(reduce_word(&r.word).unwrap(), vec![0]);
}

#[test]
fn back_and_forth_gives_aba() {
    let tr = on_axis(&[0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 1.5]);
    let r = route_extract(&tr, &two_clusters(), LAMBDA, 1.0);
    assert_eq!(r.word, vec![0, 1, 0]);
    assert_eq!(r.word_string(), "0-1-0");
    assert_eq!(r.tau.len(), 3);
    assert_eq!(reduce_word(&r.word).unwrap(), vec![0]);
}

#[test]
fn entry_at_final_time_is_ignored() {
    let tr = on_axis(&[0.0, 0.5, 1.0]);
    assert!(route_extract(&tr, &two_clusters(), LAMBDA, 1.0).is_empty());
}

#[test]
fn staying_time_of_aa_route() {
    let tr = on_axis(&[0.0, 1.0, 1.05, 1.6, 1.0, 1.6, 2.0]);
    let mut pot = ConstantPotential(0.0);
    let s = staying_excursion_split(&tr, &two_clusters(), &mut pot, LAMBDA, 1.0, 2.0, 1.0).unwrap();
    assert!((s.staying_time - 4.0 / 6.0).abs() < 1e-12, "{s:?}");
    assert!((s.excursion_time - 2.0 / 6.0).abs() < 1e-12);
    assert!((s.k_star - 1.0).abs() < 1e-12);
    assert!(s.precondition && s.xi_integral <= s.bound);
}

proptest! {
    #[test]
    fn reduction_is_idempotent(w in prop::collection::vec(0u8..5, 1..40)) {
        let r = reduce_word(&w).unwrap();
        prop_assert_eq!(reduce_word(&r).unwrap(), r.clone());
        // Distinct letters, same first and last letter.
        let mut s = r.clone();
        s.sort_unstable();
        s.dedup();
        prop_assert_eq!(s.len(), r.len());
        prop_assert_eq!(r[0], w[0]);
        prop_assert_eq!(r.last(), w.last());
    }
}

#[test]
fn se_halves_with_four_times_the_paths() {
    let mut pot = PlantedPeak { center: HPoint::polar(0.5, &[1.0, 0.0]), height: 2.0, radius: 1.0 };
    let a = fkmc::fk_estimate(&mut pot, 2, 1.0, 0.01, 1000, 51).unwrap();
    let b = fkmc::fk_estimate(&mut pot, 2, 1.0, 0.01, 4000, 52).unwrap();
    let ratio = a.se / b.se;
    assert!((ratio / 2.0 - 1.0).abs() <= 0.2, "SE ratio {ratio}");
}

#[test]
fn quenched_log_average_below_annealed() {
    let spec = Arc::new(make_spec(0.25, 1.0, BumpShape::default(), 2).unwrap());
    let logs: Vec<f64> = (0..50u64)
        .map(|k| fkmc::fk_quenched(&spec, 1.0, 0.01, 100, rng::child_seed(53, rng::tag::FK_FIELD, k), 20_000).unwrap().0.log_mean)
        .collect();
    let ann = fkmc::fk_annealed(&spec, 1.0, 0.01, 2000, 54).unwrap();
    let q = MeanVar::of(&logs).mean;
    assert!(q <= ann.mean.ln() + 3.0 * ann.se / ann.mean, "quenched {q} vs annealed {}", ann.mean.ln());
}

#[test]
fn main_term_is_relaxed_exponent() {
    let p = ModelParams::new(2, 1.0).unwrap();
    let (alpha, mu) = (0.1, 1.1 * p.mu0());
    let rc = varopt::route_constants_checked(1.36, 0.01, 15.0, 16.0, &p, 1.0, alpha, mu).unwrap();
    let mut g = rng::stream(55, rng::tag::FUZZ, 0);
    let want = l_star_relaxed(alpha, mu, &p).unwrap();
    for t in [10.0, 20.0] {
        let geo = fkmc::random_geometry(t, &rc, 4, 3, &mut g);
        let b = fkmc::route_budget(&geo, t, alpha, mu, &p, &rc).unwrap();
        assert!((b.main_term / t.powf(5.0 / 3.0) - want).abs() <= 1e-9 * want);
    }
}

#[test]
fn long_route_tail_decreases_in_t() {
    let p = ModelParams::new(2, 1.0).unwrap();
    let f: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&t| fkmc::long_route_tail(0.3, 4, t, &p, 16.0).unwrap().log_f).collect();
    assert!(f[0] > f[1] && f[1] > f[2], "{f:?}");
}

#[test]
fn xi_integral_respects_staying_bound() {
    let spec = Arc::new(make_spec(1.0, 1.0, BumpShape::default(), 2).unwrap());
    let (t, dt, lambda, delta) = (1.0, 0.01, 0.3, 1.2);
    let mu = 1.1 * ModelParams::new(2, 1.0).unwrap().mu0();
    let mut checked = 0;
    for k in 0..10u64 {
        let mut field = LazyField::new(spec.clone(), spec.r0 / 8.0, rng::child_seed(56, rng::tag::FK_FIELD, k), 20_000);
        let paths: Vec<Trajectory> = (0..20).map(|i| fkmc::fk_path(2, t, dt, 56 + k, i).unwrap()).collect();
        for tr in &paths {
            for x in &tr.points {
                field.value_at(x).unwrap();
            }
        }
        let islands = detect_islands(&field.field, delta, t, field.snap).unwrap();
        let clusters = build_clusters(&islands, &field.field.sites, lambda, t).unwrap();
        for tr in &paths {
            let s = staying_excursion_split(tr, &clusters, &mut field as &mut dyn Potential, lambda, delta, mu, t).unwrap();
            let direct = fkmc::path_integral(&mut field, tr).unwrap();
            assert!((direct - s.xi_integral).abs() <= 1e-9 * (1.0 + direct.abs()));
            if s.precondition {
                checked += 1;
                assert!(s.xi_integral <= s.bound, "{} > {}", s.xi_integral, s.bound);
            }
        }
    }
    assert!(checked > 0, "precondition never held");
}
