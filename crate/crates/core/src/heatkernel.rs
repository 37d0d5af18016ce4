//! Heat kernel of `∂_t = Δ` on `H^d`: the two-sided comparison function,
//! exact kernels for `d = 2, 3`, calibration of the comparison constants,
//! and bridge marginals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypbm::bm_endpoint_radii;
use crate::hypgeo::{ball_volume, distance, HPoint};
use crate::numerics::integrate_to_inf;

use std::f64::consts::PI;

/// `ln q(t,ρ)` with
/// `q = t^{-d/2} exp(-(d-1)²t/4 - ρ²/4t - (d-1)ρ/2) (1+ρ+t)^{(d-3)/2} (1+ρ)`.
pub fn ln_comparison_fn(t: f64, rho: f64, d: usize) -> f64 {
    let df = d as f64;
    let dm1 = df - 1.0;
    -0.5 * df * t.ln() - dm1 * dm1 * t / 4.0 - rho * rho / (4.0 * t) - 0.5 * dm1 * rho
        + 0.5 * (df - 3.0) * (1.0 + rho + t).ln()
        + rho.ln_1p()
}

pub fn comparison_fn(t: f64, rho: f64, d: usize) -> f64 {
    ln_comparison_fn(t, rho, d).exp()
}

/// `ln(ρ/sinh ρ)`, with the limit 0 at `ρ = 0`.
fn ln_rho_over_sinh(rho: f64) -> f64 {
    if rho < 1e-4 {
        -rho * rho / 6.0
    } else if rho < 20.0 {
        (rho / rho.sinh()).ln()
    } else {
        rho.ln() + std::f64::consts::LN_2 - rho - (-(-2.0 * rho).exp()).ln_1p()
    }
}

/// `ln p₃(t,ρ)`, `p₃ = (4πt)^{-3/2} (ρ/sinh ρ) e^{-t-ρ²/4t}`.
pub fn ln_exact_h3(t: f64, rho: f64) -> f64 {
    -1.5 * (4.0 * PI * t).ln() + ln_rho_over_sinh(rho) - t - rho * rho / (4.0 * t)
}

pub fn exact_h3(t: f64, rho: f64) -> f64 {
    ln_exact_h3(t, rho).exp()
}

/// `ln p₂(t,ρ)` from
/// `p₂ = √2 e^{-t/4} (4πt)^{-3/2} ∫_ρ^∞ s e^{-s²/4t} (cosh s - cosh ρ)^{-1/2} ds`.
///
/// With `s = ρ + w²` and `cosh(ρ+w²) - cosh ρ = 2 sinh(ρ+w²/2) sinh(w²/2)`, the
/// factors `e^{-ρ²/4t}` and `e^{-ρ/2}` come out of the integral, leaving a
/// smooth, O(1) integrand in `w`.
pub fn ln_exact_h2(t: f64, rho: f64) -> f64 {
    let integrand = |w: f64| {
        let w2 = w * w;
        let expo = -(2.0 * rho * w2 + w2 * w2) / (4.0 * t);
        if expo < -740.0 {
            return 0.0;
        }
        let a = rho + 0.5 * w2;
        // e^{-ρ} sinh(ρ + w²/2)
        let es = if a < 20.0 { (-rho).exp() * a.sinh() } else { 0.5 * (0.5 * w2).exp() * (1.0 - (-2.0 * a).exp()) };
        let denom = (2.0 * es * (0.5 * w2).sinh()).sqrt();
        if denom == 0.0 {
            // w → 0 limit of 2w(ρ+w²)/denom.
            return if rho > 0.0 { 2.0 * rho / ((-rho).exp() * rho.sinh()).sqrt() } else { 0.0 };
        }
        2.0 * w * (rho + w2) * expo.exp() / denom
    };
    let j = integrate_to_inf(integrand, 0.0, 0.0, 1e-11);
    0.5 * std::f64::consts::LN_2 - 0.25 * t - 1.5 * (4.0 * PI * t).ln() - rho * rho / (4.0 * t) - 0.5 * rho + j.ln()
}

pub fn exact_h2(t: f64, rho: f64) -> f64 {
    ln_exact_h2(t, rho).exp()
}

/// Log of the exact kernel for `d ∈ {2, 3}`.
pub fn ln_exact_kernel(d: usize, t: f64, rho: f64) -> Result<f64> {
    if !(t > 0.0 && rho >= 0.0) {
        return Err(Error::InvalidParameter(format!("kernel at t={t}, rho={rho}")));
    }
    match d {
        2 => Ok(ln_exact_h2(t, rho)),
        3 => Ok(ln_exact_h3(t, rho)),
        _ => Err(Error::KernelUnavailable(d)),
    }
}

pub fn exact_kernel(d: usize, t: f64, rho: f64) -> Result<f64> {
    ln_exact_kernel(d, t, rho).map(f64::exp)
}

/// `t` log-spaced on `[t_min, t_max]`, `ρ` uniform on `[0, rho_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub rho_max: f64,
    pub n_rho: usize,
}

impl Default for CalibrationGrid {
    fn default() -> Self {
        Self { t_min: 0.1, t_max: 10.0, n_t: 25, rho_max: 20.0, n_rho: 81 }
    }
}

impl CalibrationGrid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        let ts: Vec<f64> = if self.n_t <= 1 {
            vec![self.t_min]
        } else {
            let r = (self.t_max / self.t_min).ln();
            (0..self.n_t).map(|i| self.t_min * (r * i as f64 / (self.n_t - 1) as f64).exp()).collect()
        };
        let rs: Vec<f64> = if self.n_rho <= 1 {
            vec![0.0]
        } else {
            (0..self.n_rho).map(|j| self.rho_max * j as f64 / (self.n_rho - 1) as f64).collect()
        };
        ts.iter().flat_map(|&t| rs.iter().map(move |&r| (t, r))).collect()
    }
}

/// Constants with `C1·q ≤ p ≤ C2·q` on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct KernelCalibration {
    pub d: usize,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "grid_spec")]
    pub grid: CalibrationGrid,
}

impl KernelCalibration {
    /// Whether `C1·q ≤ p ≤ C2·q` at `(t, ρ)` (relative slack `rel`).
    pub fn sandwiches(&self, t: f64, rho: f64, p: f64, rel: f64) -> bool {
        let q = comparison_fn(t, rho, self.d);
        p >= self.c1 * q * (1.0 - rel) && p <= self.c2 * q * (1.0 + rel)
    }
}

/// `C1 = min p/q`, `C2 = max p/q` over the grid (ratios taken in log space).
pub fn calibrate(d: usize, grid: &CalibrationGrid, ratio_cap: f64) -> Result<KernelCalibration> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (t, rho) in grid.points() {
        let lr = ln_exact_kernel(d, t, rho)? - ln_comparison_fn(t, rho, d);
        if !lr.is_finite() {
            return Err(Error::CalibrationFailed(format!("non-finite ratio at t={t}, rho={rho}")));
        }
        lo = lo.min(lr);
        hi = hi.max(lr);
    }
    let (c1, c2) = (lo.exp(), hi.exp());
    if c2 / c1 > ratio_cap {
        return Err(Error::CalibrationFailed(format!("C2/C1 = {} exceeds cap {ratio_cap}", c2 / c1)));
    }
    Ok(KernelCalibration { d, c1, c2, grid: *grid })
}

/// Histogram estimate of `p(t,ρ)` from simulated Brownian endpoints.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensityBin {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub count: usize,
    /// `count / (n · vol(shell))`.
    pub density: f64,
    pub se: f64,
}

pub fn mc_kernel_density(
    d: usize,
    t: f64,
    dt: f64,
    n_paths: usize,
    n_bins: usize,
    rho_max: f64,
    seed: u64,
) -> Result<Vec<DensityBin>> {
    let radii = bm_endpoint_radii(d, t, dt, n_paths, seed)?;
    let w = rho_max / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for r in radii {
        let b = (r / w) as usize;
        if b < n_bins {
            counts[b] += 1;
        }
    }
    let n = n_paths as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let (lo, hi) = (i as f64 * w, (i + 1) as f64 * w);
            let vol = ball_volume(hi, d) - ball_volume(lo, d);
            let p = count as f64 / n;
            DensityBin { rho_lo: lo, rho_hi: hi, count, density: p / vol, se: (p * (1.0 - p) / n).sqrt() / vol }
        })
        .collect())
}

/// Density at `y` of a bridge from `(t_a, x)` to `(t_b, q)` at time `t_mid`.
pub fn bridge_marginal(t_a: f64, x: &HPoint, t_b: f64, q: &HPoint, t_mid: f64, y: &HPoint) -> Result<f64> {
    if !(t_a < t_mid && t_mid < t_b) {
        return Err(Error::InvalidParameter(format!("need t_a < t_mid < t_b, got {t_a}, {t_mid}, {t_b}")));
    }
    let d = x.dim();
    let l = ln_exact_kernel(d, t_mid - t_a, distance(x, y))? + ln_exact_kernel(d, t_b - t_mid, distance(y, q))?
        - ln_exact_kernel(d, t_b - t_a, distance(x, q))?;
    Ok(l.exp())
}
