use std::sync::Arc;

use hyperbolic_pam::gaussfield::{
    self, cluster_property_frequency, make_spec, sample_field, BumpShape, ClusterPropertyConfig, CovarianceSpec,
    FieldSampler,
};
use hyperbolic_pam::hypgeo::{distance, exp_map, random_direction, tangent_from_frame, HPoint};
use hyperbolic_pam::rng;
use hyperbolic_pam::stats::MeanVar;

fn spec(shape: &str) -> Arc<CovarianceSpec> {
    Arc::new(make_spec(1.0, 1.0, BumpShape::parse(shape).unwrap(), 2).unwrap())
}

/// Point at distance `rho` from `x` in a random direction.
fn at_distance(x: &HPoint, rho: f64, g: &mut rng::Rng) -> HPoint {
    let w = random_direction(x.dim(), g);
    let v: Vec<f64> = tangent_from_frame(x, &w).iter().map(|c| c * rho).collect();
    exp_map(x, &v)
}

#[test]
fn covariance_is_stationary() {
    for shape in ["poly3", "exp"] {
        let s = spec(shape);
        let mut g = rng::stream(31, rng::tag::PROBE, 0);
        // Pairs at equal separation in mutually independent places (> R0 apart).
        let rhos = [0.3, 0.6];
        let mut sites = Vec::new();
        let mut pairs = Vec::new();
        for (b, &rho) in rhos.iter().enumerate() {
            for k in 0..4 {
                let dir = [((b * 4 + k) as f64 * 0.785).cos(), ((b * 4 + k) as f64 * 0.785).sin()];
                let base = HPoint::polar(if k % 2 == 0 { 2.5 } else { 5.5 }, &dir);
                sites.push(base.clone());
                sites.push(at_distance(&base, rho, &mut g));
                pairs.push((b, sites.len() - 2, sites.len() - 1));
            }
        }
        let sampler = FieldSampler::new(s.clone(), sites.clone()).unwrap();
        let n = 10_000;
        let draws: Vec<Vec<f64>> = (0..n).map(|i| sampler.sample_values(rng::child_seed(32, rng::tag::FIELD, i))).collect();
        let est: Vec<(usize, MeanVar)> = pairs
            .iter()
            .map(|&(b, i, j)| {
                assert!((distance(&sites[i], &sites[j]) - rhos[b]).abs() < 1e-9);
                (b, MeanVar::of(&draws.iter().map(|v| v[i] * v[j]).collect::<Vec<_>>()))
            })
            .collect();
        for (a, ea) in &est {
            for (b, eb) in &est {
                if a == b {
                    let z = (ea.mean - eb.mean).abs() / (ea.se().powi(2) + eb.se().powi(2)).sqrt();
                    assert!(z <= 4.0, "{shape}: bin {a}: {} vs {} ({z:.2} SE)", ea.mean, eb.mean);
                }
            }
        }
    }
}

#[test]
fn sampling_is_deterministic() {
    let s = spec("poly3");
    let sites: Vec<HPoint> = (0..20).map(|i| HPoint::polar(0.1 * i as f64, &[1.0, 0.0])).collect();
    let a = sample_field(&s, &sites, 5).unwrap();
    let b = sample_field(&s, &sites, 5).unwrap();
    let c = sample_field(&s, &sites, 6).unwrap();
    assert_eq!(a.values, b.values);
    assert_ne!(a.values, c.values);
}

#[test]
fn gradient_growth_is_sublinear() {
    let fit = gaussfield::gradient_growth(&spec("poly3"), &[1.0, 2.0, 4.0], 0.25, 10, 33, 20_000).unwrap();
    assert!(fit.exponent <= 0.75, "{fit:?}");
    assert!(fit.mean_max_grad.windows(2).all(|w| w[1] >= w[0]), "{fit:?}");
}

#[test]
fn crowded_ball_frequency_falls_with_t() {
    let s = spec("poly3");
    let mut cfg = ClusterPropertyConfig::new(&s, 0.8, 1.0, 2.0);
    cfg.min_sep = s.r0;
    cfg.region_radius = 2.5;
    cfg.t_grid = vec![1.0, 2.0, 4.0];
    cfg.n_reps = 100;
    let rows = cluster_property_frequency(&s, &cfg).unwrap();
    let f: Vec<f64> = rows.iter().map(|r| r.frequency).collect();
    assert!(f.windows(2).all(|w| w[1] <= w[0]) && f[0] > f[2], "{f:?}");
}

#[test]
fn importance_sampling_matches_exact_scan() {
    let s = spec("poly3");
    let (r, u) = (2.0, 3.0);
    let exact = gaussfield::max_scan(&s, &[r], 0.25, 4000, &[u / r.sqrt()], 34, 20_000).unwrap();
    let p = exact[0].exceed[0];
    let se_p = (p * (1.0 - p) / 4000.0).sqrt();
    let is = gaussfield::exceedance_is(&s, r, u, 0.25, 4000, 35).unwrap();
    let se_is = is.clumps_se * (-is.clumps).exp();
    let tol = 4.0 * (se_p * se_p + se_is * se_is).sqrt() + 0.25 * p;
    assert!((is.p_hat - p).abs() <= tol, "IS {} vs exact {p} (tol {tol})", is.p_hat);
}
