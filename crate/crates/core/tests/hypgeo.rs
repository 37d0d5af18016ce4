use proptest::prelude::*;

use hyperbolic_pam::hypgeo::{
    distance, exp_map, geodesic_point, log_map, poincare_distance, random_direction, greedy_packing, HPoint, Region,
};
use hyperbolic_pam::rng;

fn point(d: usize) -> impl Strategy<Value = HPoint> {
    (0.0..6.0f64, prop::collection::vec(-1.0..1.0f64, d)).prop_map(|(r, v)| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-6 {
            HPoint::origin(v.len())
        } else {
            HPoint::polar(r, &v.iter().map(|x| x / n).collect::<Vec<_>>())
        }
    })
}

fn triple() -> impl Strategy<Value = (HPoint, HPoint, HPoint)> {
    (2usize..5).prop_flat_map(|d| (point(d), point(d), point(d)))
}

proptest! {
    #[test]
    fn symmetric_and_triangle((x, y, z) in triple()) {
        let (a, b, c) = (distance(&x, &y), distance(&y, &z), distance(&x, &z));
        prop_assert!((a - distance(&y, &x)).abs() <= 1e-9);
        prop_assert!(c <= a + b + 1e-9);
        prop_assert!(distance(&x, &x) <= 1e-7);
    }

    #[test]
    fn poincare_agrees((x, y, _) in triple()) {
        let dp = poincare_distance(&x.to_poincare(), &y.to_poincare());
        prop_assert!((dp - distance(&x, &y)).abs() <= 1e-8 * (1.0 + dp), "{} vs {}", dp, distance(&x, &y));
    }

    #[test]
    fn geodesics_are_convex((a0, a1, b0) in triple(), s in 0.0..1.0f64, e in 0.0..1.0f64) {
        // Second geodesic ends near the first one's end so both far and near pairs occur.
        let b1 = geodesic_point(&a1, &b0, e);
        let lhs = distance(&geodesic_point(&a0, &a1, s), &geodesic_point(&b0, &b1, s));
        let rhs = distance(&a0, &b0).max(distance(&a1, &b1));
        prop_assert!(lhs <= rhs + 1e-9, "{} > {}", lhs, rhs);
    }

    #[test]
    fn exp_inverts_log((x, y, _) in triple()) {
        let back = exp_map(&x, &log_map(&x, &y));
        prop_assert!(distance(&back, &y) <= 1e-7 * (1.0 + distance(&x, &y)));
    }
}

#[test]
fn distance_axioms_bulk() {
    let mut g = rng::stream(7, rng::tag::PROBE, 0);
    let pt = |d: usize, g: &mut rng::Rng| HPoint::polar(5.0 * g.random::<f64>(), &random_direction(d, g));
    for k in 0..100_000 {
        let d = 2 + k % 3;
        let (x, y, z) = (pt(d, &mut g), pt(d, &mut g), pt(d, &mut g));
        let (a, b, c) = (distance(&x, &y), distance(&y, &z), distance(&x, &z));
        assert!((a - distance(&y, &x)).abs() <= 1e-9);
        assert!(c <= a + b + 1e-9, "triangle: {c} > {a} + {b}");
    }
}

#[test]
fn poincare_bulk() {
    let mut g = rng::stream(8, rng::tag::PROBE, 0);
    for _ in 0..10_000 {
        let x = HPoint::polar(6.0 * g.random::<f64>(), &random_direction(3, &mut g));
        let y = HPoint::polar(6.0 * g.random::<f64>(), &random_direction(3, &mut g));
        let dp = poincare_distance(&x.to_poincare(), &y.to_poincare());
        assert!((dp - distance(&x, &y)).abs() <= 1e-8 * (1.0 + dp));
    }
}

#[test]
fn packing_separates_and_covers() {
    for (d, radius, r) in [(2, 3.0, 0.2), (3, 2.0, 0.25)] {
        let p = greedy_packing(&Region::ball_at_origin(d, radius), r, 11).unwrap();
        assert!(p.min_separation() > 2.0 * r);
        assert!(p.centers.iter().all(|c| distance(c, &HPoint::origin(d)) <= radius + 1e-12));
        // Maximality: no probe of the shrunken region is farther than 2r from all centres.
        let miss = p.uncovered_fraction(10_000, 12);
        assert!(miss <= 1e-3, "d = {d}: uncovered fraction {miss}");
    }
}
