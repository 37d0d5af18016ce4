//! Brownian motion on `H^d` (generator `Δ`), its radial part, bridges,
//! first-passage laws and path energy.

pub mod bridge;
pub mod energy;
pub mod radial;
pub mod smoothing;

use std::io::Write;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

pub use bridge::{bridge_ldp_decay, simulate_bridge, BridgeSpec, LdpFit, LdpRow};
pub use energy::{energy_excess_check, EnergyProblem, EnergyReport};
pub use radial::{exit_stats, radial_drift, simulate_radial, ExitMode, ExitRow};
pub use smoothing::{c_q, SmoothingFn};

use crate::error::{Error, Result};
use crate::hypgeo::{distance, exp_map, tangent_from_frame, HPoint};
use crate::numerics::erfc;
use crate::rng::{self, Rng};

/// Sampled path: strictly increasing times from 0 and one point per time.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<HPoint>,
}

/// Per-step displacement above `STEP_SANITY·sqrt(2Δt)` is flagged.
pub const STEP_SANITY: f64 = 50.0;

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn end(&self) -> &HPoint {
        self.points.last().expect("non-empty trajectory")
    }

    /// Indices of steps whose displacement breaks the sanity bound.
    pub fn flagged_steps(&self) -> Vec<usize> {
        (1..self.len())
            .filter(|&i| {
                let dt = self.times[i] - self.times[i - 1];
                distance(&self.points[i - 1], &self.points[i]) > STEP_SANITY * (2.0 * dt).sqrt()
            })
            .collect()
    }

    pub fn check(&self) -> Result<()> {
        if self.times.len() != self.points.len() || self.times.is_empty() {
            return Err(Error::InvalidParameter("times/points length mismatch".into()));
        }
        if self.times[0] != 0.0 || self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("times must start at 0 and increase strictly".into()));
        }
        Ok(())
    }

    /// CSV: `time, x0..xd`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.points.first().map_or(0, |p| p.dim());
        let head: Vec<String> = (0..=d).map(|k| format!("x{k}")).collect();
        writeln!(w, "time,{}", head.join(","))?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let c: Vec<String> = p.coords.iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{t:e},{}", c.join(","))?;
        }
        Ok(())
    }
}

/// Step count `round(t/dt)` (at least 1 when `t > 0`) and the matching step.
pub fn step_grid(t: f64, dt: f64) -> (usize, f64) {
    if t <= 0.0 {
        return (0, 0.0);
    }
    let n = ((t / dt).round() as usize).max(1);
    (n, t / n as f64)
}

fn check_bm_args(d: usize, t: f64, dt: f64) -> Result<()> {
    if d < 2 || !(t >= 0.0) || !(dt > 0.0) || (t > 0.0 && dt > t) {
        return Err(Error::InvalidParameter(format!("simulate_bm(d={d}, t={t}, dt={dt})")));
    }
    Ok(())
}

/// One geodesic random-walk step: tangent Gaussian of covariance `2h·I`.
pub fn bm_step(x: &HPoint, h: f64, rng: &mut Rng) -> HPoint {
    let s = (2.0 * h).sqrt();
    let w: Vec<f64> = (0..x.dim()).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect();
    exp_map(x, &tangent_from_frame(x, &w))
}

/// Brownian path from `start` on `[0,t]`, drawn from `rng`.
pub fn simulate_bm_with(start: &HPoint, t: f64, dt: f64, rng: &mut Rng) -> Result<Trajectory> {
    check_bm_args(start.dim(), t, dt)?;
    let (n, h) = step_grid(t, dt);
    let mut times = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    times.push(0.0);
    points.push(start.clone());
    for i in 1..=n {
        let next = bm_step(&points[i - 1], h, rng);
        times.push(if i == n { t } else { i as f64 * h });
        points.push(next);
    }
    Ok(Trajectory { times, points })
}

/// Brownian path from `o`; path `index` of the family keyed by `seed`.
pub fn simulate_bm_path(d: usize, t: f64, dt: f64, seed: u64, index: u64) -> Result<Trajectory> {
    let mut g = rng::stream(seed, rng::tag::BM, index);
    simulate_bm_with(&HPoint::origin(d), t, dt, &mut g)
}

/// Brownian path from `o` on `[0,t]` with step `≈ dt`.
pub fn simulate_bm(d: usize, t: f64, dt: f64, seed: u64) -> Result<Trajectory> {
    simulate_bm_path(d, t, dt, seed, 0)
}

/// `d(o, W_t)` for `n_paths` independent paths (only endpoints kept).
pub fn bm_endpoint_radii(d: usize, t: f64, dt: f64, n_paths: usize, seed: u64) -> Result<Vec<f64>> {
    check_bm_args(d, t, dt)?;
    let (n, h) = step_grid(t, dt);
    let o = HPoint::origin(d);
    Ok((0..n_paths)
        .map(|k| {
            let mut g = rng::stream(seed, rng::tag::BM, k as u64);
            let mut x = o.clone();
            for _ in 0..n {
                x = bm_step(&x, h, &mut g);
            }
            distance(&o, &x)
        })
        .collect())
}

/// Density of the first time a standard 1D Brownian motion hits level `a`.
pub fn first_passage_density(a: f64, s: f64) -> f64 {
    if !(s > 0.0) {
        return 0.0;
    }
    a / ((2.0 * std::f64::consts::PI).sqrt() * s.powf(1.5)) * (-a * a / (2.0 * s)).exp()
}

/// `log` of [`first_passage_density`] (finite for tiny `s`).
pub fn ln_first_passage_density(a: f64, s: f64) -> f64 {
    a.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 1.5 * s.ln() - a * a / (2.0 * s)
}

/// `P(τ_a ≤ s) = erfc(a/√(2s))`.
pub fn first_passage_cdf(a: f64, s: f64) -> f64 {
    if !(s > 0.0) {
        return 0.0;
    }
    erfc(a / (2.0 * s).sqrt())
}

/// Hitting time of `a > 0` by a simulated standard 1D Brownian motion, or
/// `None` if not hit by `s_max`. In-step crossings are detected with the
/// Brownian-bridge probability `exp(-2(a-x)(a-y)/h)`; the hit is placed at the
/// middle of that step.
pub fn simulate_hitting_time(a: f64, dt: f64, s_max: f64, rng: &mut Rng) -> Option<f64> {
    let (n, h) = step_grid(s_max, dt);
    let sd = h.sqrt();
    let mut x = 0.0;
    for i in 0..n {
        let y = x + sd * rng.sample::<f64, _>(StandardNormal);
        if y >= a || rng.random::<f64>() < (-2.0 * (a - x) * (a - y) / h).exp() {
            return Some((i as f64 + 0.5) * h);
        }
        x = y;
    }
    None
}

/// Discrete Dirichlet energy `Σ d(x_i,x_{i+1})²/Δv_i`, time rescaled to `[0,1]`.
pub fn path_energy(traj: &Trajectory) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::InvalidParameter("path_energy needs at least two points".into()));
    }
    let total = traj.duration() - traj.times[0];
    Ok((1..traj.len())
        .map(|i| {
            let dv = (traj.times[i] - traj.times[i - 1]) / total;
            distance(&traj.points[i - 1], &traj.points[i]).powi(2) / dv
        })
        .sum())
}
