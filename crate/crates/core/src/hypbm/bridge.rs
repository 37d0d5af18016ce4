//! Brownian bridges on `H^d` and their small-time deviation probabilities.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypbm::{step_grid, Trajectory};
use crate::hypgeo::{distance, exp_map, geodesic_point, log_map, tangent_from_frame, HPoint};
use crate::rng::{self, child_seed};
use crate::stats::{linear_fit, zero_count_upper};

#[derive(Debug, Clone, Serialize)]
pub struct BridgeSpec {
    pub start: HPoint,
    pub end: HPoint,
    /// Duration.
    pub s: f64,
}

impl BridgeSpec {
    pub fn new(start: HPoint, end: HPoint, s: f64) -> Result<Self> {
        start.validate()?;
        end.validate()?;
        if start.dim() != end.dim() {
            return Err(Error::DimensionMismatch(start.dim(), end.dim()));
        }
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!("bridge duration {s}")));
        }
        Ok(Self { start, end, s })
    }
}

/// `-2∂_ρ log p(τ,ρ) - ρ/τ`: the part of the bridge drift not present in a
/// Euclidean bridge. Exact kernel for `d = 3`, comparison function otherwise.
pub fn curvature_drift(d: usize, tau: f64, rho: f64) -> f64 {
    if d == 3 {
        // -2(1/ρ - coth ρ), with the series 2ρ/3 - 2ρ³/45 near 0.
        if rho < 1e-3 {
            2.0 * rho / 3.0 - 2.0 * rho.powi(3) / 45.0
        } else {
            2.0 * (1.0 / rho.tanh() - 1.0 / rho)
        }
    } else {
        let dm1 = d as f64 - 1.0;
        dm1 - (d as f64 - 3.0) / (1.0 + rho + tau) - 2.0 / (1.0 + rho)
    }
}

/// Bridge path on the grid `round(s/dt)`.
///
/// Each step moves toward the target by the Euclidean-bridge fraction `h/τ`
/// of the remaining distance plus the curvature drift, with tangent noise of
/// variance `2h(τ-h)/τ`. The last point is set to the target.
pub fn simulate_bridge(spec: &BridgeSpec, dt: f64, seed: u64) -> Result<Trajectory> {
    if !(dt > 0.0 && dt < spec.s) {
        return Err(Error::InvalidParameter(format!("bridge step {dt} must lie in (0, s)")));
    }
    let d = spec.start.dim();
    let (n, h) = step_grid(spec.s, dt);
    let mut g = rng::stream(seed, rng::tag::BRIDGE, 0);
    let mut times = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    times.push(0.0);
    points.push(spec.start.clone());
    for i in 0..n {
        let x = &points[i];
        let tau = spec.s - i as f64 * h;
        let to_end = log_map(x, &spec.end);
        let rho = distance(x, &spec.end);
        let pull = if rho > 1e-12 { h / tau + h * curvature_drift(d, tau, rho) / rho } else { 0.0 };
        let sd = (2.0 * h * (tau - h).max(0.0) / tau).sqrt();
        let w: Vec<f64> = (0..d).map(|_| sd * g.sample::<f64, _>(StandardNormal)).collect();
        let noise = tangent_from_frame(x, &w);
        let v: Vec<f64> = to_end.iter().zip(&noise).map(|(a, b)| pull * a + b).collect();
        let next = if i + 1 == n { spec.end.clone() } else { exp_map(x, &v) };
        times.push(if i + 1 == n { spec.s } else { (i + 1) as f64 * h });
        points.push(next);
    }
    Ok(Trajectory { times, points })
}

/// `max_v d(ω_v, γ_v)` over the grid, `γ` the constant-speed geodesic.
pub fn max_deviation(traj: &Trajectory, start: &HPoint, end: &HPoint) -> f64 {
    let s = traj.duration();
    traj.times
        .iter()
        .zip(&traj.points)
        .map(|(t, p)| distance(p, &geodesic_point(start, end, t / s)))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LdpRow {
    pub s: f64,
    pub hits: usize,
    pub n: usize,
    pub p_hat: f64,
    /// One-sided 95% upper bound when `hits = 0`, else the point estimate.
    pub upper: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LdpFit {
    pub rows: Vec<LdpRow>,
    /// `-slope` of `log p̂` against `1/s` (NaN with fewer than two usable rows).
    pub kappa: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_fit: usize,
}

/// `P(sup_v d(ω_v,γ_v) > δ/2)` for bridges of duration `s ∈ s_list`, and the
/// fit `log P̂ ≈ a - κ/s`.
pub fn bridge_ldp_decay(
    x: &HPoint,
    y: &HPoint,
    delta: f64,
    s_list: &[f64],
    n_paths: usize,
    steps: usize,
    seed: u64,
) -> Result<LdpFit> {
    if !(delta > 0.0) || n_paths == 0 || steps < 2 {
        return Err(Error::InvalidParameter(format!("bridge_ldp_decay(delta={delta}, n={n_paths}, steps={steps})")));
    }
    let mut rows = Vec::with_capacity(s_list.len());
    for (k, &s) in s_list.iter().enumerate() {
        let spec = BridgeSpec::new(x.clone(), y.clone(), s)?;
        let dt = s / steps as f64;
        let mut hits = 0;
        for i in 0..n_paths {
            let seed_i = child_seed(child_seed(seed, rng::tag::BRIDGE, k as u64), rng::tag::BRIDGE, i as u64);
            let tr = simulate_bridge(&spec, dt, seed_i)?;
            if max_deviation(&tr, x, y) > 0.5 * delta {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / n_paths as f64;
        let upper = if hits == 0 { zero_count_upper(n_paths) } else { p_hat };
        rows.push(LdpRow { s, hits, n: n_paths, p_hat, upper, steps });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.hits > 0).map(|r| (1.0 / r.s, r.p_hat.ln())).unzip();
    let (kappa, intercept, r2) = if xs.len() >= 2 {
        let f = linear_fit(&xs, &ys);
        (-f.slope, f.intercept, f.r2)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(LdpFit { rows, kappa, intercept, r2, n_fit: xs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_determinism() {
        let x = HPoint::origin(3);
        let y = HPoint::polar(1.0, &[0.0, 1.0, 0.0]);
        let spec = BridgeSpec::new(x.clone(), y.clone(), 0.3).unwrap();
        let a = simulate_bridge(&spec, 0.003, 5).unwrap();
        let b = simulate_bridge(&spec, 0.003, 5).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.points[0], x);
        assert_eq!(*a.end(), y);
        // The step before the pinned end is already within the dt-scale window.
        assert!(distance(&a.points[a.len() - 2], &y) < 5.0 * (2.0 * 0.003f64).sqrt());
        assert!(simulate_bridge(&spec, 0.5, 1).is_err());
    }

    #[test]
    fn curvature_drift_series_matches() {
        let r: f64 = 1e-3;
        let direct = 2.0 * (1.0 / r.tanh() - 1.0 / r);
        assert!((curvature_drift(3, 1.0, r * 0.999) - direct).abs() < 1e-6);
    }

    #[test]
    fn huge_delta_gives_one_sided_bound() {
        let x = HPoint::origin(2);
        let y = HPoint::polar(1.0, &[1.0, 0.0]);
        let fit = bridge_ldp_decay(&x, &y, 10.0, &[0.05], 200, 20, 1).unwrap();
        assert_eq!(fit.rows[0].hits, 0);
        assert!(fit.rows[0].upper > 0.0 && fit.rows[0].upper < 0.02);
        assert!(fit.kappa.is_nan());
    }
}
