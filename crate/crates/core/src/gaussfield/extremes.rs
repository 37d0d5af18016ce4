//! Maxima, tails and gradients of the field over geodesic balls.

use std::sync::Arc;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussfield::kernel::CovarianceSpec;
use crate::gaussfield::sample::{covariance_matrix, FieldSampler};
use crate::hypgeo::{ball_volume, distance, greedy_packing, greedy_packing_from, HPoint, Region};
use crate::numerics::{erfc, pivoted_cholesky};
use crate::rng::{self, child_seed, Rng};
use crate::stats::{linear_fit, MeanVar};

/// One row of [`max_scan`].
#[derive(Debug, Clone, Serialize)]
pub struct MaxScanRow {
    pub r: f64,
    pub spacing: f64,
    pub n_sites: usize,
    pub n_reps: usize,
    pub mean_max: f64,
    pub se_max: f64,
    pub max_max: f64,
    /// Threshold multipliers `μ` (threshold `μ√R`).
    pub mus: Vec<f64>,
    /// Fraction of replicates with `max|ξ| > μ√R`, aligned with `mus`.
    pub exceed: Vec<f64>,
    /// Per-replicate `max|ξ|`.
    #[serde(skip)]
    pub maxima: Vec<f64>,
}

/// Upper estimate of the number of sites a packing at `spacing` puts in `Q_R`.
pub fn site_estimate(d: usize, r: f64, spacing: f64) -> f64 {
    ball_volume(r + 0.5 * spacing, d) / ball_volume(0.5 * spacing, d)
}

/// Sites of a packing of `Q_R` with pairwise separation `> spacing`.
pub fn scan_sites(d: usize, r: f64, spacing: f64, seed: u64, site_cap: usize) -> Result<Vec<HPoint>> {
    let est = site_estimate(d, r, spacing);
    if est > site_cap as f64 {
        return Err(Error::BudgetExceeded { what: format!("sites in Q_{r}"), value: est as usize, cap: site_cap });
    }
    if r < 0.5 * spacing {
        return Ok(vec![HPoint::origin(d)]);
    }
    Ok(greedy_packing(&Region::ball_at_origin(d, r), 0.5 * spacing, seed)?.centers)
}

/// Exact scans of `max_{Q_R}|ξ|` over `n_reps` independent fields per radius.
pub fn max_scan(
    spec: &Arc<CovarianceSpec>,
    r_list: &[f64],
    spacing: f64,
    n_reps: usize,
    mus: &[f64],
    seed: u64,
    site_cap: usize,
) -> Result<Vec<MaxScanRow>> {
    if !(spacing > 0.0 && spacing <= 0.5 * spec.r0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("spacing {spacing} must lie in (0, R0/2]")));
    }
    if n_reps == 0 {
        return Err(Error::InvalidParameter("n_reps = 0".into()));
    }
    let mut rows = Vec::with_capacity(r_list.len());
    for (k, &r) in r_list.iter().enumerate() {
        let sites = scan_sites(spec.d, r, spacing, child_seed(seed, rng::tag::PACKING, k as u64), site_cap)?;
        let n_sites = sites.len();
        let sampler = FieldSampler::new(spec.clone(), sites)?;
        let maxima: Vec<f64> = (0..n_reps)
            .map(|i| {
                let v = sampler.sample_values(child_seed(seed, rng::tag::FIELD, (k * n_reps + i) as u64));
                v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
            })
            .collect();
        let mv = MeanVar::of(&maxima);
        let exceed = mus
            .iter()
            .map(|mu| {
                let u = mu * r.sqrt();
                maxima.iter().filter(|&&m| m > u).count() as f64 / n_reps as f64
            })
            .collect();
        rows.push(MaxScanRow {
            r,
            spacing,
            n_sites,
            n_reps,
            mean_max: mv.mean,
            se_max: mv.se(),
            max_max: maxima.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mus: mus.to_vec(),
            exceed,
            maxima,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BorellRow {
    pub lambda: f64,
    pub p_hat: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Empirical `P(max > λ)` against `4·exp(-(λ-Ê)²/2σ²)` for each `λ > Ê`.
pub fn borell_check(maxima: &[f64], sigma2: f64, lambdas: &[f64]) -> Vec<BorellRow> {
    let e = MeanVar::of(maxima).mean;
    let n = maxima.len() as f64;
    lambdas
        .iter()
        .filter(|&&l| l > e)
        .map(|&lambda| {
            let p_hat = maxima.iter().filter(|&&m| m > lambda).count() as f64 / n;
            let bound = 4.0 * (-(lambda - e).powi(2) / (2.0 * sigma2)).exp();
            BorellRow { lambda, p_hat, bound, holds: p_hat <= bound }
        })
        .collect()
}

/// Importance-sampling estimate of `P(max_{Q_R}|ξ| > u)` on a spacing lattice.
#[derive(Debug, Clone, Serialize)]
pub struct IsEstimate {
    pub r: f64,
    pub u: f64,
    pub spacing: f64,
    /// Estimated number of lattice sites in `Q_R`.
    pub n_sites: f64,
    /// Expected number of exceedance clumps, `N·P(|ξ|>u)·E[1/M]`.
    pub clumps: f64,
    pub clumps_se: f64,
    /// `1 - exp(-clumps)`.
    pub p_hat: f64,
    pub n_samples: usize,
    pub mean_window: f64,
}

/// `Z` conditioned on `Z > a` (`a ≥ 0`), Marsaglia's tail method.
fn normal_tail(a: f64, rng: &mut Rng) -> f64 {
    if a < 1.0 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z > a {
                return z;
            }
        }
    }
    loop {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        let x = (a * a - 2.0 * u1.ln()).sqrt();
        if u2 * x < a {
            return x;
        }
    }
}

/// Sites per unit volume of an interior piece of a reference packing.
fn lattice_density(d: usize, spacing: f64, r0: f64, seed: u64) -> Result<f64> {
    let r_ref = (2.0 * r0).max(8.0 * spacing);
    let p = greedy_packing(&Region::ball_at_origin(d, r_ref), 0.5 * spacing, seed)?;
    let inner = r_ref - spacing;
    let o = HPoint::origin(d);
    let n = p.centers.iter().filter(|c| distance(c, &o) <= inner).count();
    Ok(n as f64 / ball_volume(inner, d))
}

/// Exceedance probability of `max|ξ|` over the spacing lattice of `Q_R`.
///
/// A site is drawn volume-uniformly in `Q_R` and conditioned on `|ξ| > u`; the
/// rest of its `R₀`-window is drawn conditionally and `M` counts the window's
/// exceedances. `N·P(|ξ|>u)·E[1/M]` estimates the expected number of
/// exceedance clumps, turned into a probability with a Poisson approximation
/// (clumps more than `R₀` apart are independent).
pub fn exceedance_is(
    spec: &Arc<CovarianceSpec>,
    r: f64,
    u: f64,
    spacing: f64,
    n_samples: usize,
    seed: u64,
) -> Result<IsEstimate> {
    if !(spacing > 0.0 && spacing <= 0.5 * spec.r0 + 1e-12) || !(u > 0.0) || !(r > 0.0) || n_samples == 0 {
        return Err(Error::InvalidParameter(format!("exceedance_is(r={r}, u={u}, spacing={spacing})")));
    }
    let d = spec.d;
    let sigma = spec.sigma2.sqrt();
    let n_sites = lattice_density(d, spacing, spec.r0, child_seed(seed, rng::tag::PACKING, u64::MAX))? * ball_volume(r, d);
    let p_site = erfc(u / (sigma * std::f64::consts::SQRT_2));
    let o = HPoint::origin(d);
    let q_r = Region::ball_at_origin(d, r);
    let mut inv_m = Vec::with_capacity(n_samples);
    let mut window_total = 0usize;
    for k in 0..n_samples {
        let mut g = rng::stream(seed, rng::tag::IS, k as u64);
        let x = q_r.sample(&mut g);
        let sign = if g.random::<bool>() { 1.0 } else { -1.0 };
        let xi_x = sign * sigma * normal_tail(u / sigma, &mut g);
        let ball = Region::Ball { center: x.clone(), radius: spec.r0 };
        let window = greedy_packing_from(&ball, 0.5 * spacing, child_seed(seed, rng::tag::PACKING, k as u64), vec![x.clone()])?;
        let others: Vec<HPoint> =
            window.centers.into_iter().skip(1).filter(|p| distance(p, &o) <= r).collect();
        window_total += others.len();
        let mut m = 1usize;
        if !others.is_empty() {
            let n = others.len();
            let c: Vec<f64> = others.iter().map(|p| spec.cov(distance(p, &x))).collect();
            let mut a = covariance_matrix(spec, &others);
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] -= c[i] * c[j] / spec.sigma2;
                }
            }
            let cols = pivoted_cholesky(&a, n, 1e-10 * spec.sigma2);
            let mut vals: Vec<f64> = c.iter().map(|ci| ci * xi_x / spec.sigma2).collect();
            for col in &cols {
                let z: f64 = g.sample(StandardNormal);
                for (v, l) in vals.iter_mut().zip(col) {
                    *v += l * z;
                }
            }
            m += vals.iter().filter(|v| v.abs() > u).count();
        }
        inv_m.push(1.0 / m as f64);
    }
    let mv = MeanVar::of(&inv_m);
    let scale = n_sites * p_site;
    let clumps = scale * mv.mean;
    Ok(IsEstimate {
        r,
        u,
        spacing,
        n_sites,
        clumps,
        clumps_se: scale * mv.se(),
        p_hat: -(-clumps).exp_m1(),
        n_samples,
        mean_window: window_total as f64 / n_samples as f64,
    })
}

/// Fit of `log P(sup_{Q_R₀} ξ > λ)` against `λ²`.
#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    pub lambdas: Vec<f64>,
    pub p_hat: Vec<f64>,
    /// `-slope` of the fit.
    pub c_fit: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `min_λ -log p̂(λ)/λ²` over thresholds with `p̂ > 0`; a valid constant
    /// for the sampled thresholds.
    pub c_conservative: f64,
}

/// Empirical Borell-tail constant of `sup ξ` on the correlation ball `Q_{R₀}`.
pub fn estimate_tail_constant(
    spec: &Arc<CovarianceSpec>,
    spacing: f64,
    n_reps: usize,
    lambdas: &[f64],
    seed: u64,
    site_cap: usize,
) -> Result<TailFit> {
    let sites = scan_sites(spec.d, spec.r0, spacing, child_seed(seed, rng::tag::PACKING, 0), site_cap)?;
    let sampler = FieldSampler::new(spec.clone(), sites)?;
    let sups: Vec<f64> = (0..n_reps)
        .map(|i| {
            let v = sampler.sample_values(child_seed(seed, rng::tag::FIELD, i as u64));
            v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let p_hat: Vec<f64> = lambdas
        .iter()
        .map(|&l| sups.iter().filter(|&&s| s > l).count() as f64 / n_reps as f64)
        .collect();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut c_cons = f64::INFINITY;
    for (&l, &p) in lambdas.iter().zip(&p_hat) {
        if p > 0.0 && l > 0.0 {
            x.push(l * l);
            y.push(p.ln());
            c_cons = c_cons.min(-p.ln() / (l * l));
        }
    }
    if x.len() < 2 {
        return Err(Error::EmptyInput("fewer than two thresholds with exceedances".into()));
    }
    let fit = linear_fit(&x, &y);
    Ok(TailFit {
        lambdas: lambdas.to_vec(),
        p_hat,
        c_fit: -fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        c_conservative: c_cons.max(0.0),
    })
}

/// Finite-difference gradient maxima over `Q_R` and their log-log growth.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub rs: Vec<f64>,
    pub mean_max_grad: Vec<f64>,
    pub exponent: f64,
    pub r2: f64,
}

/// `max |ξ(x)-ξ(y)|/d(x,y)` over lattice neighbours (`d ≤ 1.5·spacing`),
/// averaged over replicates, for each radius; slope of `log` mean vs `log R`.
pub fn gradient_growth(
    spec: &Arc<CovarianceSpec>,
    r_list: &[f64],
    spacing: f64,
    n_reps: usize,
    seed: u64,
    site_cap: usize,
) -> Result<GrowthFit> {
    let mut means = Vec::with_capacity(r_list.len());
    for (k, &r) in r_list.iter().enumerate() {
        let sites = scan_sites(spec.d, r, spacing, child_seed(seed, rng::tag::PACKING, k as u64), site_cap)?;
        let mut index = crate::hypgeo::PointIndex::new(1.5 * spacing);
        for s in &sites {
            index.insert(s);
        }
        let mut pairs = Vec::new();
        for (i, s) in sites.iter().enumerate() {
            for j in index.candidates(s, 1.5 * spacing) {
                if j < i {
                    let dij = distance(s, &sites[j]);
                    if dij <= 1.5 * spacing {
                        pairs.push((i, j, dij));
                    }
                }
            }
        }
        if pairs.is_empty() {
            return Err(Error::EmptyInput(format!("no neighbour pairs in Q_{r}")));
        }
        let sampler = FieldSampler::new(spec.clone(), sites)?;
        let maxes: Vec<f64> = (0..n_reps)
            .map(|i| {
                let v = sampler.sample_values(child_seed(seed, rng::tag::FIELD, (k * n_reps + i) as u64));
                pairs.iter().fold(0.0f64, |m, &(a, b, dab)| m.max((v[a] - v[b]).abs() / dab))
            })
            .collect();
        means.push(MeanVar::of(&maxes).mean);
    }
    let lx: Vec<f64> = r_list.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let fit = linear_fit(&lx, &ly);
    Ok(GrowthFit { rs: r_list.to_vec(), mean_max_grad: means, exponent: fit.slope, r2: fit.r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussfield::kernel::{make_spec, BumpShape};

    fn spec() -> Arc<CovarianceSpec> {
        Arc::new(make_spec(1.0, 1.0, BumpShape::default(), 2).unwrap())
    }

    #[test]
    fn single_site_half_normal_mean() {
        let rows = max_scan(&spec(), &[0.01], 0.25, 20_000, &[1.0], 1, 10_000).unwrap();
        let row = &rows[0];
        assert_eq!(row.n_sites, 1);
        let target = (2.0 / std::f64::consts::PI).sqrt();
        assert!((row.mean_max - target).abs() < 4.0 * row.se_max);
    }

    #[test]
    fn budget_is_enforced() {
        let e = max_scan(&spec(), &[12.0], 0.25, 1, &[], 1, 10_000).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn tail_draw_stays_in_tail() {
        let mut g = rng::stream(1, 0, 0);
        let xs: Vec<f64> = (0..5000).map(|_| normal_tail(4.0, &mut g)).collect();
        assert!(xs.iter().all(|&x| x > 4.0));
        // E[Z | Z > a] = φ(a)/Q(a) ≈ 4.2256 at a = 4.
        let m = MeanVar::of(&xs);
        assert!((m.mean - 4.2256).abs() < 4.0 * m.se() + 1e-3);
    }

    #[test]
    fn borell_rows_only_above_mean() {
        let rows = borell_check(&[1.0, 2.0, 3.0], 1.0, &[0.5, 2.5, 3.5]);
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.holds));
    }
}
