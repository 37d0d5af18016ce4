//! Lower bound on the energy of paths that leave a geodesic tube.

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypgeo::{distance, exp_map, tangent_from_frame, HPoint};
use crate::numerics::golden_max;
use crate::rng::{self};

/// Paths from `o` to the `end_radius`-ball around `y` (`d(o,y) = K*`) that
/// pass through a point at distance `deviation` from the geodesic point `γ_v`
/// at some time `v`.
///
/// The cheapest such path is two geodesic pieces `o → p → e`, so the search
/// is over `(v, φ)` with `p = exp_{γ_v}(deviation·(cos φ T + sin φ N))`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyProblem {
    pub k_star: f64,
    pub deviation: f64,
    pub end_radius: f64,
    pub d: usize,
}

impl EnergyProblem {
    fn geodesic(&self, v: f64) -> HPoint {
        let mut dir = vec![0.0; self.d];
        dir[0] = 1.0;
        HPoint::polar(v * self.k_star, &dir)
    }

    /// Energy of the two-piece path through the deviation point `(v, φ)`.
    pub fn energy(&self, v: f64, phi: f64) -> f64 {
        let g = self.geodesic(v);
        let mut w = vec![0.0; self.d];
        w[0] = self.deviation * phi.cos();
        w[1] = self.deviation * phi.sin();
        let p = exp_map(&g, &tangent_from_frame(&g, &w));
        let y = self.geodesic(1.0);
        let a = distance(&HPoint::origin(self.d), &p);
        let b = (distance(&p, &y) - self.end_radius).max(0.0);
        a * a / v + b * b / (1.0 - v)
    }

    /// Grid search over `(v, φ)`, then alternating golden-section refinement
    /// from the best grid point and from `n_starts` random starts.
    pub fn minimize(&self, grid: usize, n_starts: usize, seed: u64) -> (f64, f64, f64) {
        let eps = 1e-6;
        let tau = std::f64::consts::TAU;
        let mut starts = Vec::new();
        let mut best = (0.5, 0.0, f64::INFINITY);
        for i in 1..grid {
            let v = i as f64 / grid as f64;
            for j in 0..grid {
                let phi = tau * j as f64 / grid as f64;
                let e = self.energy(v, phi);
                if e < best.2 {
                    best = (v, phi, e);
                }
            }
        }
        starts.push((best.0, best.1));
        let mut g = rng::stream(seed, rng::tag::PROBE, 0);
        for _ in 0..n_starts {
            starts.push((eps + (1.0 - 2.0 * eps) * g.random::<f64>(), tau * g.random::<f64>()));
        }
        let h_v = 1.0 / grid as f64;
        let h_phi = tau / grid as f64;
        for (mut v, mut phi) in starts {
            let mut e = self.energy(v, phi);
            for round in 0..30 {
                let wv = h_v * 0.5f64.powi(round / 3);
                let wp = h_phi * 0.5f64.powi(round / 3);
                let (nv, _) = golden_max(|s| -self.energy(s, phi), (v - wv).max(eps), (v + wv).min(1.0 - eps), 1e-12);
                v = nv;
                let (np, ne) = golden_max(|a| -self.energy(v, a), phi - wp, phi + wp, 1e-12);
                phi = np;
                let new_e = -ne;
                if (e - new_e).abs() < 1e-15 {
                    e = new_e;
                    break;
                }
                e = new_e;
            }
            if e < best.2 {
                best = (v, phi.rem_euclid(tau), e);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub k_star: f64,
    pub delta: f64,
    pub eta: f64,
    pub zeta: f64,
    pub d: usize,
    pub end_radius: f64,
    pub min_energy: f64,
    pub argmin_v: f64,
    pub argmin_phi: f64,
    /// `K*²`, the energy of the geodesic.
    pub geodesic_energy: f64,
    /// `K*² + δ²/128 - 4K*(5η + 2K*ζ)`.
    pub bound: f64,
    pub margin: f64,
    /// Whether `η < min{δ/24, δ²/(2560K*)}` holds (reported, not enforced).
    pub eta_zeta_strict: bool,
}

/// Minimum energy of paths `o → B(y, 3η+2K*ζ)` deviating `≥ δ/4` from the
/// geodesic, against the lower bound.
pub fn energy_excess_check(
    k_star: f64,
    delta: f64,
    eta: f64,
    zeta: f64,
    d: usize,
    n_trials: usize,
    seed: u64,
) -> Result<EnergyReport> {
    if !(k_star > 0.0 && delta > 0.0 && eta > 0.0 && zeta >= 0.0) || d < 2 {
        return Err(Error::InvalidParameter(format!(
            "energy_excess_check(K*={k_star}, delta={delta}, eta={eta}, zeta={zeta}, d={d})"
        )));
    }
    let end_radius = 3.0 * eta + 2.0 * k_star * zeta;
    if !(delta < k_star) {
        return Err(Error::ConstraintViolation(format!("delta = {delta} must be below K* = {k_star}")));
    }
    if !(eta < delta / 24.0) {
        return Err(Error::ConstraintViolation(format!("eta = {eta} must be below delta/24 = {}", delta / 24.0)));
    }
    if end_radius > delta / 8.0 {
        return Err(Error::ConstraintViolation(format!(
            "end ball radius 3 eta + 2 K* zeta = {end_radius} exceeds delta/8 = {}",
            delta / 8.0
        )));
    }
    let prob = EnergyProblem { k_star, deviation: 0.25 * delta, end_radius, d };
    let (v, phi, e) = prob.minimize(64, n_trials, seed);
    let bound = k_star * k_star + delta * delta / 128.0 - 4.0 * k_star * (5.0 * eta + 2.0 * k_star * zeta);
    Ok(EnergyReport {
        k_star,
        delta,
        eta,
        zeta,
        d,
        end_radius,
        min_energy: e,
        argmin_v: v,
        argmin_phi: phi,
        geodesic_energy: k_star * k_star,
        bound,
        margin: e - bound,
        eta_zeta_strict: eta < (delta / 24.0).min(delta * delta / (2560.0 * k_star)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_deviation_recovers_geodesic() {
        let p = EnergyProblem { k_star: 1.3, deviation: 0.0, end_radius: 0.0, d: 2 };
        let (_, _, e) = p.minimize(32, 4, 1);
        assert!((e - 1.69).abs() < 1e-9);
    }

    #[test]
    fn worked_example_respects_bound() {
        let r = energy_excess_check(1.0, 0.5, 0.02, 0.001, 2, 16, 1).unwrap();
        assert!((r.bound - (1.0 + 0.25 / 128.0 - 4.0 * 0.102)).abs() < 1e-12);
        assert!(r.min_energy >= r.bound - 1e-2);
        assert!(!r.eta_zeta_strict);
    }

    #[test]
    fn preconditions() {
        assert_eq!(energy_excess_check(1.0, 0.5, 0.05, 0.0, 2, 1, 1).unwrap_err().exit_code(), 2);
        assert!(energy_excess_check(0.4, 0.5, 0.01, 0.0, 2, 1, 1).is_err());
    }
}
