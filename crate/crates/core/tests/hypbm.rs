use std::f64::consts::PI;

use hyperbolic_pam::heatkernel::exact_h3;
use hyperbolic_pam::hypbm::{
    self, bm_endpoint_radii, path_energy, radial, simulate_bm_path, simulate_bm_with, simulate_bridge, BridgeSpec,
    Trajectory,
};
use hyperbolic_pam::hypgeo::{distance, geodesic_point, HPoint};
use hyperbolic_pam::numerics::integrate;
use hyperbolic_pam::rng;
use hyperbolic_pam::stats::{ks_one_sample, ks_two_sample};

#[test]
fn full_simulator_matches_radial_sde() {
    for d in [2usize, 3] {
        let (t, dt) = (1.0, 0.002);
        let full = bm_endpoint_radii(d, t, dt, 10_000, 41).unwrap();
        let rad = radial::radial_endpoints(d, t, dt, 0.0, 10_000, 42).unwrap();
        let ks = ks_two_sample(&full, &rad);
        assert!(ks.p_value > 0.01, "d = {d}: {ks:?}");
    }
}

#[test]
fn bridges_end_at_target() {
    let x = HPoint::origin(3);
    let y = HPoint::polar(2.0, &[0.0, 1.0, 0.0]);
    let dt = 0.01;
    for seed in 0..200 {
        let spec = BridgeSpec::new(x.clone(), y.clone(), 1.0).unwrap();
        let tr = simulate_bridge(&spec, dt, seed).unwrap();
        let last = tr.points.len() - 1;
        assert!(distance(&tr.points[last], &y) <= 5.0 * (2.0 * dt).sqrt());
        // The step before the pinned end is also close.
        assert!(distance(&tr.points[last - 1], &y) <= 5.0 * (2.0 * dt).sqrt(), "seed {seed}");
    }
}

fn geodesic_traj(x: &HPoint, y: &HPoint, n: usize) -> Trajectory {
    let times: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let points = times.iter().map(|&s| geodesic_point(x, y, s)).collect();
    Trajectory { times, points }
}

#[test]
fn geodesic_energy_is_refinement_invariant() {
    let x = HPoint::polar(1.0, &[1.0, 0.0]);
    let y = HPoint::polar(3.0, &[0.0, 1.0]);
    let d = distance(&x, &y);
    for n in [8, 64] {
        let e1 = path_energy(&geodesic_traj(&x, &y, n)).unwrap();
        let e2 = path_energy(&geodesic_traj(&x, &y, 2 * n)).unwrap();
        assert!((e1 - e2).abs() < 1e-8, "{e1} vs {e2}");
        assert!((e1 - d * d).abs() < 1e-8);
    }
}

#[test]
fn identical_seeds_give_identical_paths() {
    let a = simulate_bm_path(3, 1.0, 0.01, 9, 4).unwrap();
    let b = simulate_bm_path(3, 1.0, 0.01, 9, 4).unwrap();
    let c = simulate_bm_path(3, 1.0, 0.01, 9, 5).unwrap();
    assert_eq!(a.times, b.times);
    assert!(a.points.iter().zip(&b.points).all(|(p, q)| p.coords == q.coords));
    assert!(a.points.last().unwrap().coords != c.points.last().unwrap().coords);
    let e = radial::simulate_radial(2, 1.0, 0.01, 0.5, 3).unwrap();
    assert_eq!(e, radial::simulate_radial(2, 1.0, 0.01, 0.5, 3).unwrap());
}

#[test]
fn semigroup_two_half_steps_give_unit_time_law() {
    let o = HPoint::origin(3);
    let radii: Vec<f64> = (0..10_000u64)
        .map(|k| {
            let mut g = rng::stream(43, rng::tag::BM, k);
            let first = simulate_bm_with(&o, 0.5, 1e-3, &mut g).unwrap();
            let second = simulate_bm_with(first.end(), 0.5, 1e-3, &mut g).unwrap();
            distance(&o, second.end())
        })
        .collect();
    let cdf = |rho: f64| integrate(|r| exact_h3(1.0, r) * 4.0 * PI * r.sinh().powi(2), 0.0, rho, 1e-13, 1e-11);
    let ks = ks_one_sample(&radii, cdf);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn hitting_times_below_horizon_follow_first_passage_law() {
    let mut g = rng::stream(44, rng::tag::BM, 0);
    let hits: Vec<f64> = (0..4000).filter_map(|_| hypbm::simulate_hitting_time(0.5, 1e-3, 1.0, &mut g)).collect();
    let p = hits.len() as f64 / 4000.0;
    let want = hypbm::first_passage_cdf(0.5, 1.0);
    assert!((p - want).abs() < 4.0 * (want * (1.0 - want) / 4000.0).sqrt(), "{p} vs {want}");
}
