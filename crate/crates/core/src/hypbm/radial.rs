//! Radial process `dR = √2 dβ + (d-1)coth R dt` and exit probabilities.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypbm::step_grid;
use crate::rng::{self, child_seed, Rng};
use crate::stats::{wilson, MeanVar};

/// Below this radius the drift uses the Laurent form of `coth`.
pub const SMALL_R: f64 = 0.1;

/// `(d-1)coth R`, with `(d-1)(1/R + R/3)` and `R ≥ √dt` near the origin.
pub fn radial_drift(d: usize, r: f64, dt: f64) -> f64 {
    let dm1 = d as f64 - 1.0;
    if r >= SMALL_R {
        dm1 / r.tanh()
    } else {
        let rr = r.max(dt.sqrt());
        dm1 * (1.0 / rr + rr / 3.0)
    }
}

fn radial_step(d: usize, r: f64, h: f64, extra: f64, z: f64) -> f64 {
    let y = r + (radial_drift(d, r, h) + extra) * h + (2.0 * h).sqrt() * z;
    y.abs()
}

/// Euler-Maruyama path of the radial process from `r0`, reflected at 0.
pub fn simulate_radial(d: usize, t: f64, dt: f64, r0: f64, seed: u64) -> Result<Vec<f64>> {
    if d < 2 || !(r0 >= 0.0) || !(dt > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("simulate_radial(d={d}, t={t}, dt={dt}, r0={r0})")));
    }
    let (n, h) = step_grid(t, dt);
    let mut g = rng::stream(seed, rng::tag::RADIAL, 0);
    let mut path = Vec::with_capacity(n + 1);
    path.push(r0);
    for i in 0..n {
        let z: f64 = g.sample(StandardNormal);
        path.push(radial_step(d, path[i], h, 0.0, z));
    }
    Ok(path)
}

/// `R_t` for `n_paths` independent radial paths from `r0`.
pub fn radial_endpoints(d: usize, t: f64, dt: f64, r0: f64, n_paths: usize, seed: u64) -> Result<Vec<f64>> {
    (0..n_paths)
        .map(|k| simulate_radial(d, t, dt, r0, child_seed(seed, rng::tag::RADIAL, k as u64)).map(|p| p[p.len() - 1]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitMode {
    /// Direct simulation.
    Plain,
    /// Extra constant drift `c = R/t - (d-1)` with likelihood-ratio weights.
    Tilted,
}

/// `P̂(τ_R ≤ t)` with a 95% interval.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExitRow {
    pub r: f64,
    pub t: f64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub se: f64,
    pub hits: usize,
    pub n: usize,
    pub tilt: f64,
}

/// Exit time of `[0,R)` by `t` on one path; returns the likelihood ratio
/// (1 when `tilt = 0`) if the level is reached.
fn exit_weight(d: usize, r: f64, t: f64, dt: f64, tilt: f64, g: &mut Rng) -> Option<f64> {
    let (n, h) = step_grid(t, dt);
    let theta = tilt / std::f64::consts::SQRT_2;
    let mut x = 0.0;
    let mut beta = 0.0;
    for i in 0..n {
        let z: f64 = g.sample(StandardNormal);
        beta += h.sqrt() * z;
        let y = radial_step(d, x, h, tilt, z);
        let crossed = y >= r || g.random::<f64>() < (-(r - x) * (r - y) / h).exp();
        if crossed {
            let tau = (i + 1) as f64 * h;
            return Some((-theta * beta - 0.5 * theta * theta * tau).exp());
        }
        x = y;
    }
    None
}

/// Exit probabilities of the radial process started at 0.
pub fn exit_stats(
    d: usize,
    r_list: &[f64],
    t: f64,
    dt: f64,
    n_paths: usize,
    mode: ExitMode,
    seed: u64,
) -> Result<Vec<ExitRow>> {
    if d < 2 || !(t > 0.0 && dt > 0.0) || n_paths == 0 {
        return Err(Error::InvalidParameter(format!("exit_stats(d={d}, t={t}, dt={dt}, n={n_paths})")));
    }
    let mut rows = Vec::with_capacity(r_list.len());
    for (k, &r) in r_list.iter().enumerate() {
        let tilt = match mode {
            ExitMode::Plain => 0.0,
            ExitMode::Tilted => (r / t - (d as f64 - 1.0)).max(0.0),
        };
        let w: Vec<f64> = (0..n_paths)
            .map(|i| {
                let mut g = rng::stream(child_seed(seed, rng::tag::EXIT, k as u64), rng::tag::EXIT, i as u64);
                exit_weight(d, r, t, dt, tilt, &mut g).unwrap_or(0.0)
            })
            .collect();
        let hits = w.iter().filter(|&&x| x > 0.0).count();
        let mv = MeanVar::of(&w);
        let (ci_lo, ci_hi) = if tilt == 0.0 {
            wilson(hits, n_paths)
        } else {
            ((mv.mean - 1.96 * mv.se()).max(0.0), mv.mean + 1.96 * mv.se())
        };
        rows.push(ExitRow { r, t, p_hat: mv.mean, ci_lo, ci_hi, se: mv.se(), hits, n: n_paths, tilt });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_asymptote_and_origin() {
        assert!((radial_drift(3, 30.0, 0.01) - 2.0).abs() < 1e-6);
        let r = 0.05;
        assert!((radial_drift(2, r, 1e-6) - 1.0 / r.tanh()).abs() < 1e-5);
        assert!(radial_drift(2, 0.0, 0.01).is_finite());
    }

    #[test]
    fn unreachable_level() {
        let rows = exit_stats(2, &[200.0], 1.0, 0.01, 500, ExitMode::Plain, 1).unwrap();
        assert_eq!(rows[0].hits, 0);
        assert_eq!(rows[0].p_hat, 0.0);
    }

    #[test]
    fn tilt_is_unbiased() {
        // Moderate level where both estimators have small error.
        let plain = exit_stats(2, &[4.0], 2.0, 0.005, 20_000, ExitMode::Plain, 3).unwrap()[0];
        let tilted = exit_stats(2, &[4.0], 2.0, 0.005, 20_000, ExitMode::Tilted, 4).unwrap()[0];
        let se = (plain.se.powi(2) + tilted.se.powi(2)).sqrt();
        assert!((plain.p_hat - tilted.p_hat).abs() < 4.0 * se, "{plain:?} {tilted:?}");
    }
}
