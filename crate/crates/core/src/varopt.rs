//! Scalar formulas: the variational functional `f(ε,K)`, its optimiser, the
//! relaxed exponent `L*(α,μ)`, Legendre-transform helpers, route constants,
//! and fuzz harnesses for the elementary inequalities used by the upper bound.

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussfield::cluster_constants;
use crate::hypbm::smoothing::c_q;
use crate::numerics::grid_golden_max;
use crate::rng;

/// Model parameters `(d, σ²)`; `μ₀ = sqrt(2σ²(d-1))`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ModelParams {
    pub d: usize,
    pub sigma2: f64,
}

impl ModelParams {
    pub fn new(d: usize, sigma2: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("d = {d} < 2")));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma2 = {sigma2}")));
        }
        Ok(Self { d, sigma2 })
    }

    /// `σ²(d-1)`.
    pub fn s(&self) -> f64 {
        self.sigma2 * (self.d as f64 - 1.0)
    }

    pub fn mu0(&self) -> f64 {
        (2.0 * self.s()).sqrt()
    }
}

/// `f(ε,K) = (1-ε)·sqrt(2σ²(d-1)K) - K²/(4ε)`.
pub fn f_eval(eps: f64, k: f64, p: &ModelParams) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) || !(k > 0.0) {
        return Err(Error::Domain(format!("f(eps={eps}, K={k})")));
    }
    Ok(f_raw(eps, k, p.s()))
}

#[inline]
fn f_raw(eps: f64, k: f64, s: f64) -> f64 {
    (1.0 - eps) * (2.0 * s * k).sqrt() - k * k / (4.0 * eps)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VariationalSolution {
    pub eps_star: f64,
    pub k_star: f64,
    pub l_star: f64,
    /// Independent numeric optimum `(ε, K, value)`.
    pub numeric: (f64, f64, f64),
    /// `|numeric value - L*|`.
    pub grid_gap: f64,
    /// Central-difference gradient norm of `f` at `(ε*, K*)`.
    pub gradient_norm: f64,
}

const GRID: usize = 400;
const GOLDEN_TOL: f64 = 1e-11;

/// Nested grid + golden-section maximisation of `g(v, K)` over `v ∈ (0,1)`, `K ∈ (0, kmax)`.
fn nested_max<G: Fn(f64, f64) -> f64>(g: G, kmax: f64) -> (f64, f64, f64) {
    let inner = |v: f64| grid_golden_max(|k| g(v, k), 1e-12, kmax, GRID, GOLDEN_TOL * kmax);
    let (v, val) = grid_golden_max(|v| inner(v).1, 1e-9, 1.0 - 1e-9, GRID, GOLDEN_TOL);
    let (k, _) = inner(v);
    (v, k, val)
}

/// Closed-form optimum, cross-validated against a numeric search.
pub fn optimize_f(p: &ModelParams) -> Result<VariationalSolution> {
    let s = p.s();
    let eps_star = 0.2;
    let k_star = 2f64.powf(5.0 / 3.0) / 5f64.powf(4.0 / 3.0) * s.cbrt();
    let l_star = 3.0 * 2f64.powf(4.0 / 3.0) / 5f64.powf(5.0 / 3.0) * s.powf(2.0 / 3.0);
    let numeric = nested_max(|e, k| f_raw(e, k, s), 5.0 * s.cbrt());
    let grid_gap = (numeric.2 - l_star).abs();
    let h = 1e-6;
    let ge = (f_raw(eps_star + h, k_star, s) - f_raw(eps_star - h, k_star, s)) / (2.0 * h);
    let gk = (f_raw(eps_star, k_star + h, s) - f_raw(eps_star, k_star - h, s)) / (2.0 * h);
    let sol = VariationalSolution {
        eps_star,
        k_star,
        l_star,
        numeric,
        grid_gap,
        gradient_norm: (ge * ge + gk * gk).sqrt(),
    };
    if (numeric.0 - eps_star).abs() > 1e-4 || (numeric.1 - k_star).abs() > 1e-4 || grid_gap > 1e-6 {
        return Err(Error::CrossValidation(format!("{sol:?}")));
    }
    Ok(sol)
}

/// `L*(α,μ) = max_{K>0, v∈(0,1)} { μ√K(1-v) - αK²/(4v) }`, numerically.
pub fn l_star_relaxed(alpha: f64, mu: f64, p: &ModelParams) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha}")));
    }
    if !(mu >= p.mu0() * (1.0 - 1e-12)) {
        return Err(Error::Domain(format!("mu = {mu} < mu0 = {}", p.mu0())));
    }
    let kmax = 5.0 * (mu * mu / 2.0).cbrt() * alpha.powf(-2.0 / 3.0);
    Ok(nested_max(|v, k| mu * k.sqrt() * (1.0 - v) - alpha * k * k / (4.0 * v), kmax).2)
}

/// Euclidean growth rate `sqrt(2dσ²)·t·sqrt(log t)`.
pub fn euclid_growth(t: f64, p: &ModelParams) -> Result<f64> {
    if !(t > std::f64::consts::E) {
        return Err(Error::Domain(format!("t = {t} ≤ e")));
    }
    Ok((2.0 * p.d as f64 * p.sigma2).sqrt() * t * t.ln().sqrt())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LegendreTriple {
    /// `H(ρ(h)) = ½σ²ρ(h)²`.
    pub h_of_rho: f64,
    /// `L(h) = h²/(2σ²)`.
    pub l_of_h: f64,
    /// `ρ(h) = h/σ²`.
    pub rho_of_h: f64,
    /// `sup_ρ {ρh - H(ρ)}` found numerically.
    pub numeric_sup: f64,
}

pub fn legendre_triple(h: f64, sigma2: f64) -> Result<LegendreTriple> {
    if !(h > 0.0) || !(sigma2 > 0.0) {
        return Err(Error::Domain(format!("h = {h}, sigma2 = {sigma2}")));
    }
    let rho = h / sigma2;
    let big_h = |r: f64| 0.5 * sigma2 * r * r;
    let l = h * h / (2.0 * sigma2);
    let (_, sup) = grid_golden_max(|r| r * h - big_h(r), 0.0, 4.0 * rho + 1.0, 2000, 1e-12 * (rho + 1.0));
    if (sup - l).abs() > 1e-6 * l.max(1.0) {
        return Err(Error::CrossValidation(format!("Legendre sup {sup} vs {l}")));
    }
    Ok(LegendreTriple { h_of_rho: big_h(rho), l_of_h: l, rho_of_h: rho, numeric_sup: sup })
}

/// Peak height `h_R = sqrt(2σ²(d-1)R)`.
pub fn peak_height(r: f64, p: &ModelParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("R = {r}")));
    }
    Ok((2.0 * p.s() * r).sqrt())
}

/// `δ(t) = (h_{K t^{4/3}} - sqrt(h_{K t^{4/3}}))^{-β}`, `β ∈ (1/4, 1/2)`.
pub fn delta_of_t(t: f64, k: f64, beta: f64, p: &ModelParams) -> Result<f64> {
    if !(beta > 0.25 && beta < 0.5) {
        return Err(Error::Domain(format!("beta = {beta} outside (1/4, 1/2)")));
    }
    let h = peak_height(k * t.powf(4.0 / 3.0), p)?;
    if h <= 1.0 {
        return Err(Error::Domain(format!("h = {h} ≤ 1: δ(t) undefined")));
    }
    Ok((h - h.sqrt()).powf(-beta))
}

pub const DEFAULT_BETA: f64 = 1.0 / 3.0;

/// Both sides of an inequality `lhs ≥ rhs` (or `lhs ≤ rhs`, see the operation).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `Σ D_i²/u_i ≥ (Σ D_i)²/Σ u_i`.
pub fn chain_bound(d: &[f64], u: &[f64]) -> Result<Sides> {
    if d.len() != u.len() {
        return Err(Error::InvalidParameter(format!("length mismatch {} vs {}", d.len(), u.len())));
    }
    if d.is_empty() || d.iter().chain(u).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("chain_bound needs positive entries".into()));
    }
    let lhs: f64 = d.iter().zip(u).map(|(a, b)| a * a / b).sum();
    let sd: f64 = d.iter().sum();
    let rhs = sd * sd / u.iter().sum::<f64>();
    Ok(Sides { lhs, rhs, holds: lhs >= rhs * (1.0 - 1e-12) })
}

/// Hop inequality, evaluated verbatim:
/// `√μ₀(η₁√K₁+η₂√K₂) - K₁²/4ε₁² - (K₂-K₁)²/4ε₂² ≤ √μ₀(1-ε₁-ε₂)√K₂ - K₂²/4(ε₁+ε₂)`.
#[allow(clippy::too_many_arguments)]
pub fn hop_inequality(eps1: f64, eps2: f64, eta1: f64, eta2: f64, k1: f64, k2: f64, p: &ModelParams) -> Result<Sides> {
    if ((eps1 + eta1 + eps2 + eta2) - 1.0).abs() > 1e-12 {
        return Err(Error::ConstraintViolation("ε₁+η₁+ε₂+η₂ ≠ 1".into()));
    }
    if !(eps1 > 0.0 && eps2 > 0.0 && eta1 >= 0.0 && eta2 >= 0.0) || !(k1 > 0.0 && k1 < k2) {
        return Err(Error::ConstraintViolation("need ε_i > 0, η_i ≥ 0, 0 < K₁ < K₂".into()));
    }
    let sm = p.mu0().sqrt();
    let lhs = sm * (eta1 * k1.sqrt() + eta2 * k2.sqrt())
        - k1 * k1 / (4.0 * eps1 * eps1)
        - (k2 - k1).powi(2) / (4.0 * eps2 * eps2);
    let rhs = sm * (1.0 - eps1 - eps2) * k2.sqrt() - k2 * k2 / (4.0 * (eps1 + eps2));
    Ok(Sides { lhs, rhs, holds: lhs <= rhs + 1e-12 * (1.0 + rhs.abs()) })
}

/// Harmonic mean ≤ arithmetic mean.
pub fn ha_mean_bound(v: &[f64]) -> Result<Sides> {
    if v.is_empty() || v.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidParameter("ha_mean_bound needs positive entries".into()));
    }
    let n = v.len() as f64;
    let hm = n / v.iter().map(|x| 1.0 / x).sum::<f64>();
    let am = v.iter().sum::<f64>() / n;
    Ok(Sides { lhs: hm, rhs: am, holds: hm <= am * (1.0 + 1e-12) })
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub name: &'static str,
    pub trials: usize,
    pub violations: Vec<String>,
}

fn rand_len(rng: &mut rng::Rng) -> usize {
    rng.random_range(1..=12)
}

fn log_uniform(rng: &mut rng::Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

pub fn fuzz_chain_bound(trials: usize, seed: u64) -> FuzzReport {
    let mut rng = rng::stream(seed, rng::tag::FUZZ, 1);
    let mut violations = Vec::new();
    for _ in 0..trials {
        let n = rand_len(&mut rng);
        let d: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-3, 1e3)).collect();
        let u: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-3, 1e3)).collect();
        let s = chain_bound(&d, &u).expect("valid instance");
        if !s.holds {
            violations.push(format!("D={d:?} u={u:?} lhs={} rhs={}", s.lhs, s.rhs));
        }
    }
    FuzzReport { name: "chain_bound", trials, violations }
}

pub fn fuzz_hop_inequality(trials: usize, seed: u64, p: &ModelParams) -> FuzzReport {
    let mut rng = rng::stream(seed, rng::tag::FUZZ, 2);
    let mut violations = Vec::new();
    let mut done = 0;
    while done < trials {
        // Flat Dirichlet split of [0,1] into ε₁, η₁, ε₂, η₂.
        let e: Vec<f64> = (0..4).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let tot: f64 = e.iter().sum();
        let (eps1, eta1, eps2) = (e[0] / tot, e[1] / tot, e[2] / tot);
        let eta2 = 1.0 - eps1 - eta1 - eps2;
        let k2 = log_uniform(&mut rng, 1e-3, 1e2);
        let k1 = k2 * rng.random::<f64>();
        if !(eps1 > 0.0 && eps2 > 0.0 && eta2 >= 0.0 && k1 > 0.0) {
            continue;
        }
        done += 1;
        match hop_inequality(eps1, eps2, eta1, eta2, k1, k2, p) {
            Ok(s) if s.holds => {}
            Ok(s) => violations.push(format!(
                "eps=({eps1},{eps2}) eta=({eta1},{eta2}) K=({k1},{k2}) lhs={} rhs={}",
                s.lhs, s.rhs
            )),
            Err(e) => violations.push(format!("infeasible draw: {e}")),
        }
    }
    FuzzReport { name: "hop_inequality", trials, violations }
}

pub fn fuzz_ha_mean(trials: usize, seed: u64) -> FuzzReport {
    let mut rng = rng::stream(seed, rng::tag::FUZZ, 3);
    let mut violations = Vec::new();
    for _ in 0..trials {
        let n = rand_len(&mut rng);
        let v: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-4, 1e4)).collect();
        let s = ha_mean_bound(&v).expect("valid instance");
        if !s.holds {
            violations.push(format!("v={v:?} hm={} am={}", s.lhs, s.rhs));
        }
    }
    FuzzReport { name: "ha_mean_bound", trials, violations }
}

/// Constants of the route machinery.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RouteConstants {
    pub eta: f64,
    pub lambda: f64,
    pub delta: f64,
    pub k0: f64,
    pub mu0: f64,
    pub n_eta: f64,
    pub n_hat_lambda: f64,
    pub l_delta: f64,
    pub eta_delta: f64,
    pub c_q: f64,
}

impl RouteConstants {
    /// `R^t(λ,η,δ) = λ(N_η L_δ(6L_δ+½) + 2L_δ) + N_η L_δ(½ + C_Q t) t^{-4/3}`.
    pub fn error_term(&self, t: f64) -> f64 {
        self.lambda * self.bracket() + self.n_eta * self.l_delta * (0.5 + self.c_q * t) * t.powf(-4.0 / 3.0)
    }

    /// `N_η L_δ(6L_δ+½) + 2L_δ`.
    pub fn bracket(&self) -> f64 {
        self.n_eta * self.l_delta * (6.0 * self.l_delta + 0.5) + 2.0 * self.l_delta
    }

    /// Both sides of `(1-α)/16·(δ/μ)⁴ > (λK₀/2)·[…]`.
    pub fn lam_eta_constraint(&self, alpha: f64, mu: f64) -> Sides {
        let lhs = (1.0 - alpha) / 16.0 * (self.delta / mu).powi(4);
        let rhs = self.lambda * self.k0 / 2.0 * self.bracket();
        Sides { lhs, rhs, holds: lhs > rhs }
    }
}

/// `N_η = η^{-1} sqrt(64 μ₀ √K₀)`.
pub fn n_eta(eta: f64, mu0: f64, k0: f64) -> f64 {
    (64.0 * mu0 * k0.sqrt()).sqrt() / eta
}

/// `N̂_λ = ½(1 + (λ/2)^{-1} sqrt(64 μ₀ √K₀))`.
pub fn n_hat_lambda(lambda: f64, mu0: f64, k0: f64) -> f64 {
    0.5 * (1.0 + (64.0 * mu0 * k0.sqrt()).sqrt() / (lambda / 2.0))
}

pub fn route_constants(
    eta: f64,
    lambda: f64,
    delta: f64,
    k0: f64,
    p: &ModelParams,
    c_r0_hat: f64,
) -> Result<RouteConstants> {
    if !(eta > 0.0 && lambda > 0.0 && delta > 0.0 && k0 > 0.0 && c_r0_hat > 0.0) {
        return Err(Error::InvalidParameter("route constants need positive arguments".into()));
    }
    let (l_delta, eta_delta) = cluster_constants(delta, p.d, k0, c_r0_hat)?;
    if !(lambda < eta && eta < eta_delta) {
        return Err(Error::ConstraintViolation(format!(
            "need 0 < λ < η < η_δ: λ={lambda}, η={eta}, η_δ={eta_delta}"
        )));
    }
    let mu0 = p.mu0();
    Ok(RouteConstants {
        eta,
        lambda,
        delta,
        k0,
        mu0,
        n_eta: n_eta(eta, mu0, k0),
        n_hat_lambda: n_hat_lambda(lambda, mu0, k0),
        l_delta,
        eta_delta,
        c_q: c_q(p.d),
    })
}

/// Same as [`route_constants`] but fails when the λ-η constraint does not hold.
#[allow(clippy::too_many_arguments)]
pub fn route_constants_checked(
    eta: f64,
    lambda: f64,
    delta: f64,
    k0: f64,
    p: &ModelParams,
    c_r0_hat: f64,
    alpha: f64,
    mu: f64,
) -> Result<RouteConstants> {
    let rc = route_constants(eta, lambda, delta, k0, p, c_r0_hat)?;
    let s = rc.lam_eta_constraint(alpha, mu);
    if !s.holds {
        return Err(Error::ConstraintViolation(format!(
            "λ-η constraint fails: (1-α)/16(δ/μ)⁴ = {} ≤ {}",
            s.lhs, s.rhs
        )));
    }
    Ok(rc)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FeasiblePair {
    pub lambda: f64,
    pub eta: f64,
    /// Supremum of feasible λ at this η, by bisection.
    pub lambda_max: f64,
    /// Closed-form supremum (the constraint is linear in λ).
    pub lambda_max_closed: f64,
}

/// Search for `(λ, η)` with `0 < λ < η < η_δ` satisfying the λ-η constraint.
/// `η` is fixed at `η_δ/2`; λ is found by bisection and returned at half the supremum.
pub fn feasible_lambda_eta(
    delta: f64,
    alpha: f64,
    mu: f64,
    k0: f64,
    p: &ModelParams,
    c_r0_hat: f64,
) -> Result<FeasiblePair> {
    let (_, eta_delta) = cluster_constants(delta, p.d, k0, c_r0_hat)?;
    let eta = 0.5 * eta_delta;
    let build = |lam: f64| route_constants(eta, lam, delta, k0, p, c_r0_hat);
    let holds = |lam: f64| build(lam).map(|rc| rc.lam_eta_constraint(alpha, mu).holds).unwrap_or(false);
    let (mut lo, mut hi) = (0.0, eta);
    if holds(hi * (1.0 - 1e-12)) {
        lo = hi;
    } else {
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if holds(m) {
                lo = m;
            } else {
                hi = m;
            }
        }
    }
    let rc = build(eta * 0.5)?;
    let lambda_max_closed = ((1.0 - alpha) / 16.0 * (delta / mu).powi(4) / (k0 / 2.0 * rc.bracket())).min(eta);
    if !(lo > 0.0) {
        return Err(Error::ConstraintViolation("no feasible λ at η = η_δ/2".into()));
    }
    Ok(FeasiblePair { lambda: 0.5 * lo, eta, lambda_max: lo, lambda_max_closed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ModelParams {
        ModelParams::new(2, 1.0).unwrap()
    }

    #[test]
    fn f_small_k_and_reference_value() {
        let p = unit();
        assert!(f_eval(0.3, 1e-14, &p).unwrap().abs() < 1e-6);
        assert!((f_eval(0.2, 0.371327, &p).unwrap() - 0.517064).abs() < 1e-5);
        assert!(f_eval(0.1, 10.0, &p).unwrap() < 0.0);
        assert!(f_eval(0.0, 1.0, &p).is_err());
        assert!(f_eval(0.5, -1.0, &p).is_err());
    }

    #[test]
    fn optimum_unit_scale() {
        let sol = optimize_f(&unit()).unwrap();
        assert_eq!(sol.eps_star, 0.2);
        assert!((sol.k_star - 0.371327).abs() < 1e-6);
        assert!((sol.l_star - 0.517065).abs() < 1e-6);
        assert!(sol.gradient_norm < 1e-6);
        assert!((f_eval(sol.eps_star, sol.k_star, &unit()).unwrap() - sol.l_star).abs() < 1e-9);
    }

    #[test]
    fn optimum_scaling_law() {
        let a = optimize_f(&ModelParams::new(2, 1.0).unwrap()).unwrap();
        let b = optimize_f(&ModelParams::new(2, 3.7).unwrap()).unwrap();
        assert!((b.l_star - 3.7f64.powf(2.0 / 3.0) * a.l_star).abs() < 1e-9);
        assert_eq!(a.eps_star, b.eps_star);
    }

    #[test]
    fn relaxed_reduces_and_is_monotone() {
        let p = unit();
        let l = optimize_f(&p).unwrap().l_star;
        assert!((l_star_relaxed(1.0, p.mu0(), &p).unwrap() - l).abs() < 1e-6);
        let alphas = [0.2, 0.4, 0.6, 0.8, 1.0];
        let mus: Vec<f64> = [1.0, 1.2, 1.5, 2.0, 3.0].iter().map(|m| m * p.mu0()).collect();
        for (i, &a) in alphas.iter().enumerate() {
            for (j, &m) in mus.iter().enumerate() {
                let v = l_star_relaxed(a, m, &p).unwrap();
                if i > 0 {
                    assert!(v < l_star_relaxed(alphas[i - 1], m, &p).unwrap());
                }
                if j > 0 {
                    assert!(v > l_star_relaxed(a, mus[j - 1], &p).unwrap());
                }
            }
        }
        let near = l_star_relaxed(0.99, 1.01 * p.mu0(), &p).unwrap();
        assert!((near - l).abs() <= 0.05 * l);
    }

    #[test]
    fn relaxed_matches_scaling_closed_form() {
        let p = unit();
        for &(a, m) in &[(0.3f64, 1.5), (0.9, 1.1), (0.5, 4.0)] {
            let mu = m * p.mu0();
            let closed = a.powf(-1.0 / 3.0) * 3.0 * 2f64.powf(4.0 / 3.0) / 5f64.powf(5.0 / 3.0)
                * (mu * mu / 2.0).powf(2.0 / 3.0);
            assert!((l_star_relaxed(a, mu, &p).unwrap() - closed).abs() < 1e-8);
        }
    }

    #[test]
    fn euclid_vs_hyperbolic_growth() {
        let p = unit();
        let l = optimize_f(&p).unwrap().l_star;
        let r: Vec<f64> = [1e2, 1e4, 1e6]
            .iter()
            .map(|&t| euclid_growth(t, &p).unwrap() / (l * t.powf(5.0 / 3.0)))
            .collect();
        assert!(r[0] > r[1] && r[1] > r[2]);
        assert!(euclid_growth(2.0, &p).is_err());
        assert!(ModelParams::new(1, 1.0).is_err());
        let p4 = ModelParams::new(2, 4.0).unwrap();
        assert!((euclid_growth(10.0, &p4).unwrap() / euclid_growth(10.0, &p).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn legendre_values() {
        let lt = legendre_triple(2.0, 1.0).unwrap();
        assert!((lt.l_of_h - 2.0).abs() < 1e-12 && (lt.rho_of_h - 2.0).abs() < 1e-12);
        assert!((lt.numeric_sup - 2.0).abs() < 1e-6);
        assert!((lt.l_of_h - (lt.rho_of_h * 2.0 - lt.h_of_rho)).abs() < 1e-12);
        let z = legendre_triple(1e-12, 1.0).unwrap();
        assert!(z.l_of_h < 1e-20 && z.rho_of_h < 1e-11 && z.h_of_rho < 1e-20);
    }

    #[test]
    fn peak_height_and_delta_slope() {
        let p = unit();
        let h = peak_height(7.0, &p).unwrap();
        assert!((h * h / 7.0 - 2.0 * p.s()).abs() < 1e-12);
        assert!(delta_of_t(100.0, 1.0, 0.2, &p).is_err());
        assert!(delta_of_t(100.0, 1.0, 0.5, &p).is_err());
        let slope = |p: &ModelParams, ts: [f64; 3]| {
            let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
            let y: Vec<f64> = ts.iter().map(|&t| delta_of_t(t, 1.0, DEFAULT_BETA, p).unwrap().ln()).collect();
            crate::stats::linear_fit(&x, &y).slope
        };
        let target = -2.0 * DEFAULT_BETA / 3.0;
        let p3 = ModelParams::new(3, 1.0).unwrap();
        assert!((slope(&p3, [1e2, 1e3, 1e4]) - target).abs() < 0.01);
        assert!((slope(&p, [1e4, 1e5, 1e6]) - target).abs() < 0.01);
    }

    #[test]
    fn chain_bound_examples() {
        let s = chain_bound(&[2.0, 4.0], &[1.0, 2.0]).unwrap();
        assert!((s.lhs - 12.0).abs() < 1e-12 && (s.rhs - 12.0).abs() < 1e-12 && s.holds);
        let s = chain_bound(&[3.0, 4.0], &[1.0, 1.0]).unwrap();
        assert!((s.lhs - 25.0).abs() < 1e-12 && (s.rhs - 24.5).abs() < 1e-12);
        let s = chain_bound(&[3.0], &[2.0]).unwrap();
        assert!((s.lhs - s.rhs).abs() < 1e-12);
        assert!(chain_bound(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn hop_examples() {
        let p = unit();
        assert!(hop_inequality(0.1, 0.1, 0.4, 0.4, 0.2, 0.4, &p).unwrap().holds);
        // Reduction: η₁ → 0, K₁ → K₂; the remaining gap is the split jump cost.
        let s = hop_inequality(0.1, 0.2, 1e-9, 0.7 - 1e-9, 0.5 - 1e-9, 0.5, &p).unwrap();
        let c = chain_bound(&[0.5, 1e-9], &[0.1, 0.2]).unwrap();
        assert!(s.holds && c.holds);
        assert!(hop_inequality(0.1, 0.1, 0.4, 0.3, 0.2, 0.4, &p).is_err());
        assert!(hop_inequality(0.1, 0.1, 0.4, 0.4, 0.5, 0.4, &p).is_err());
    }

    #[test]
    fn ha_examples() {
        let s = ha_mean_bound(&[3.0, 3.0, 3.0]).unwrap();
        assert!((s.lhs - s.rhs).abs() < 1e-12);
        let s = ha_mean_bound(&[1.0, 4.0]).unwrap();
        assert!((s.lhs - 1.6).abs() < 1e-12 && (s.rhs - 2.5).abs() < 1e-12 && s.holds);
    }

    #[test]
    fn route_constant_scalings() {
        let p = unit();
        assert!((n_eta(0.05, p.mu0(), 2.0) / n_eta(0.1, p.mu0(), 2.0) - 2.0).abs() < 1e-12);
        let rc = route_constants(1e-3, 1e-4, 0.5, 1.0, &p, 1.0).unwrap();
        let lim = rc.lambda * rc.bracket();
        let gaps: Vec<f64> = [1e2, 1e4, 1e6, 1e8].iter().map(|&t| rc.error_term(t) - lim).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]) && gaps[3] < 1e-2 * gaps[0]);
        assert!(route_constants(1e-3, 2e-3, 0.5, 1.0, &p, 1.0).is_err());
    }

    #[test]
    fn feasible_pair_exists_for_example() {
        let p = unit();
        let mu = 1.1 * p.mu0();
        let fp = feasible_lambda_eta(0.5, 0.9, mu, 2.0, &p, 1.0).unwrap();
        assert!(fp.lambda > 0.0 && fp.lambda < fp.eta);
        assert!(((fp.lambda_max - fp.lambda_max_closed) / fp.lambda_max_closed).abs() < 1e-9);
        let rc = route_constants_checked(fp.eta, fp.lambda, 0.5, 2.0, &p, 1.0, 0.9, mu).unwrap();
        assert!(rc.lam_eta_constraint(0.9, mu).holds);
    }
}
