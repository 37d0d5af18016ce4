//! Route-budget bound generator and the long-route tail.
//!
//! Every multiple integral over `{Σu_i < t}` of products of kernels
//! `D/(2√π u^{3/2}) e^{-cD²/u}` is a first-passage probability after
//! rescaling, since first-passage densities of a 1D Brownian motion convolve
//! level-additively. Integrals are evaluated by log-space quadrature of the
//! combined density; the erfc closed forms are reported alongside.

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fkmc::routes::reduce_positions;
use crate::hypbm::ln_first_passage_density;
use crate::numerics::{ln_erfc, ln_integral_unimodal};
use crate::rng::Rng;
use crate::varopt::{chain_bound, l_star_relaxed, ModelParams, RouteConstants, Sides};

const QUAD_REL: f64 = 1e-11;

/// Distances along an extended route `c₁…c_m`.
#[derive(Debug, Clone, Serialize)]
pub struct RouteGeometry {
    pub labels: Vec<usize>,
    /// `D₀` from `o` to the first entry, `D_i` from the exit of `c_i` to the entry of `c_{i+1}`.
    pub gaps: Vec<f64>,
    /// 1-based position of the letter whose cluster holds the furthest visited point.
    pub far: usize,
    /// `t^{-4/3}·` distance from `o` to the furthest visited point.
    pub k_star: f64,
}

impl RouteGeometry {
    /// Gap indices `i₀ = 0, i₁, …, i_{m̄-1}` of the reduced word of `c₁…c_far`.
    pub fn reduced_gap_indices(&self) -> Result<Vec<usize>> {
        let pos = reduce_positions(&self.labels[..self.far])?;
        let mut idx = vec![0];
        idx.extend(pos[..pos.len() - 1].iter().map(|p| p + 1));
        Ok(idx)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteBudget {
    pub t: f64,
    pub alpha: f64,
    pub mu: f64,
    pub m: usize,
    pub m_bar: usize,
    /// `Σ D̂_{i_l}` over the reduced route.
    pub reduced_sum: f64,
    /// Cauchy-Schwarz chain on the reduced `D̂` at the equal time split.
    pub chain: Sides,
    /// `K* t^{4/3} ≤ Σ D_{i_l} + bracket·λ t^{4/3}`.
    pub trian_holds: bool,
    /// `L*(α,μ)·t^{5/3}`.
    pub main_term: f64,
    /// `R^t(λ,η,δ)`.
    pub error_term: f64,
    /// `log J` (quadrature); `+∞` when the `u₀` exponent is not negative.
    pub log_j: f64,
    pub log_j_closed: f64,
    /// `(δ + L*) t^{5/3} + log J`.
    pub log_bound: f64,
    /// `log I`, the staying-part integral the bound controls.
    pub log_i: f64,
    pub log_i_closed: f64,
    /// `δ t^{5/3} + log I`.
    pub log_staying: f64,
    /// `log F(t;λ,η,δ,α,μ)`, the geometry-free majorant after rescaling.
    pub log_f: f64,
}

fn check_inputs(g: &RouteGeometry, t: f64, alpha: f64, mu: f64, p: &ModelParams, rc: &RouteConstants) -> Result<()> {
    let m = g.labels.len();
    if m == 0 || g.gaps.len() != m || g.far == 0 || g.far > m {
        return Err(Error::InvalidParameter(format!(
            "route geometry: {} labels, {} gaps, far = {}",
            m,
            g.gaps.len(),
            g.far
        )));
    }
    if !(t > 0.0 && alpha > 0.0 && alpha < 1.0 && g.k_star > 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t}, alpha = {alpha}, K* = {}", g.k_star)));
    }
    if !(mu >= p.mu0() * (1.0 - 1e-12)) {
        return Err(Error::Domain(format!("mu = {mu} < mu0 = {}", p.mu0())));
    }
    let s = rc.lam_eta_constraint(alpha, mu);
    if !s.holds {
        return Err(Error::ConstraintViolation(format!(
            "lambda-eta constraint (1-α)/16·(δ/μ)⁴ = {} must exceed λK₀/2·bracket = {}",
            s.lhs, s.rhs
        )));
    }
    let min_gap = 0.5 * rc.lambda * t.powf(4.0 / 3.0);
    if let Some(d) = g.gaps.iter().find(|&&d| d < min_gap) {
        return Err(Error::InvalidParameter(format!("gap {d} below λt^{{4/3}}/2 = {min_gap}")));
    }
    if m as f64 > rc.n_hat_lambda {
        return Err(Error::ConstraintViolation(format!("route length {m} exceeds N̂_λ = {}", rc.n_hat_lambda)));
    }
    Ok(())
}

/// Prefactor and level of `∫_{Σu<t} ∏ D̂_i/(2√π u_i^{3/2}) e^{-(1-α)D̂_i²/4u_i} e^{κ/u₀} du`
/// written as `pref · P(τ_level < t)`; `None` when the `u₀` exponent is `≥ 0`.
fn j_level(dhat: &[f64], alpha: f64, kappa: f64) -> Option<(f64, f64)> {
    let r = (0.5 * (1.0 - alpha)).sqrt();
    let a0sq = 2.0 * ((1.0 - alpha) * dhat[0] * dhat[0] / 4.0 - kappa);
    if !(a0sq > 0.0) {
        return None;
    }
    let a0 = a0sq.sqrt();
    let level = a0 + dhat[1..].iter().map(|d| d * r).sum::<f64>();
    let ln_pref = -0.5 * (dhat.len() - 1) as f64 * (1.0 - alpha).ln() + (dhat[0] / (2f64.sqrt() * a0)).ln();
    Some((ln_pref, level))
}

/// `ln P(τ_a < s)` by quadrature of the first-passage density.
fn ln_fp_cdf_quad(a: f64, s: f64) -> f64 {
    ln_integral_unimodal(|u| if u > 0.0 { ln_first_passage_density(a, u) } else { f64::NEG_INFINITY }, 0.0, s, QUAD_REL)
}

/// Bound for one route geometry at time `t`.
pub fn route_budget(
    g: &RouteGeometry,
    t: f64,
    alpha: f64,
    mu: f64,
    p: &ModelParams,
    rc: &RouteConstants,
) -> Result<RouteBudget> {
    check_inputs(g, t, alpha, mu, p, rc)?;
    let t43 = t.powf(4.0 / 3.0);
    let t53 = t.powf(5.0 / 3.0);
    let shift = 0.5 + rc.c_q * t;
    let dhat: Vec<f64> = g.gaps.iter().map(|d| d - shift).collect();
    if let Some(d) = dhat.iter().find(|&&d| d <= 0.0) {
        return Err(Error::Domain(format!("D̂ = {d} ≤ 0: t too small for this geometry")));
    }
    let idx = g.reduced_gap_indices()?;
    let m_bar = idx.len();
    if m_bar as f64 > rc.n_eta * rc.l_delta {
        return Err(Error::ConstraintViolation(format!(
            "reduced route length {m_bar} exceeds N_η L_δ = {}",
            rc.n_eta * rc.l_delta
        )));
    }
    let red: Vec<f64> = idx.iter().map(|&i| dhat[i]).collect();
    let reduced_sum: f64 = red.iter().sum();
    let chain = chain_bound(&red, &vec![t / m_bar as f64; m_bar])?;
    let raw_sum: f64 = idx.iter().map(|&i| g.gaps[i]).sum();
    let trian_holds = g.k_star * t43 <= raw_sum + rc.bracket() * rc.lambda * t43;

    let main_term = l_star_relaxed(alpha, mu, p)? * t53;
    let error_term = rc.error_term(t);
    let kappa = 0.5 * g.k_star * error_term * t43 * t43;
    let (log_j, log_j_closed) = match j_level(&dhat, alpha, kappa) {
        None => (f64::INFINITY, f64::INFINITY),
        Some((lp, level)) => (lp + ln_fp_cdf_quad(level, t), lp + ln_erfc(level / (2.0 * t).sqrt())),
    };
    if log_j.is_finite() && (log_j - log_j_closed).abs() > 1e-6 * (1.0 + log_j_closed.abs()) {
        return Err(Error::Quadrature(format!("log J quadrature {log_j} vs closed form {log_j_closed}")));
    }

    // I(t) = ∫₀^t f_A(U) e^{c(t-U)} dU with A = ΣD̂_i/√2, c = μ√K* t^{2/3}.
    let a = dhat.iter().sum::<f64>() / 2f64.sqrt();
    let c = mu * g.k_star.sqrt() * t.powf(2.0 / 3.0);
    let log_i = c * t
        + ln_integral_unimodal(
            |u| if u > 0.0 { ln_first_passage_density(a, u) - c * u } else { f64::NEG_INFINITY },
            0.0,
            t,
            QUAD_REL,
        );
    let log_i_closed = ln_killed_first_passage(a, c, t) + c * t;

    Ok(RouteBudget {
        t,
        alpha,
        mu,
        m: g.labels.len(),
        m_bar,
        reduced_sum,
        chain,
        trian_holds,
        main_term,
        error_term,
        log_j,
        log_j_closed,
        log_bound: rc.delta * t53 + main_term + log_j,
        log_i,
        log_i_closed,
        log_staying: rc.delta * t53 + log_i,
        log_f: log_f_limit(t, g.labels.len(), alpha, mu, rc),
    })
}

/// `ln E[e^{-cτ_a}; τ_a < t] = ln ½[e^{-a√(2c)} erfc((a-√(2c)t)/√(2t)) + e^{a√(2c)} erfc((a+√(2c)t)/√(2t))]`.
pub fn ln_killed_first_passage(a: f64, c: f64, t: f64) -> f64 {
    let b = (2.0 * c).sqrt();
    let st = (2.0 * t).sqrt();
    let x = -a * b + ln_erfc((a - b * t) / st);
    let y = a * b + ln_erfc((a + b * t) / st);
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln() - std::f64::consts::LN_2
}

/// `log F` for routes of length `m`, after `u = v t^{8/3}`:
/// `∏_{i<m} (K₀√2/a_i) · erfc(Σa_i/√(2T))`, `T = t^{-5/3}`,
/// `a_i = λ√((1-α)/32)` for `i ≥ 1` and `a₀ = √(2c₀)`,
/// `c₀ = (1-α)(δ/μ)⁴/16 - K₀R^t/2`. `+∞` when `c₀ ≤ 0`.
pub fn log_f_limit(t: f64, m: usize, alpha: f64, mu: f64, rc: &RouteConstants) -> f64 {
    let c0 = (1.0 - alpha) * (rc.delta / mu).powi(4) / 16.0 - rc.k0 * rc.error_term(t) / 2.0;
    if !(c0 > 0.0) || m == 0 {
        return f64::INFINITY;
    }
    let a0 = (2.0 * c0).sqrt();
    let ai = rc.lambda * ((1.0 - alpha) / 32.0).sqrt();
    let big_t = t.powf(-5.0 / 3.0);
    let k = rc.k0 * 2f64.sqrt();
    (k / a0).ln() + (m - 1) as f64 * (k / ai).ln() + ln_erfc((a0 + (m - 1) as f64 * ai) / (2.0 * big_t).sqrt())
}

/// Random geometry satisfying the hypotheses of [`route_budget`]:
/// gaps in `[max(λt^{4/3}/2, ½+C_Q t)·(1+1e-3), 2K₀t^{4/3}]` (`D₀ ≤ K₀t^{4/3}`),
/// reduced length within `N_η L_δ`, and `K*` drawn so that the triangle
/// bound holds.
pub fn random_geometry(t: f64, rc: &RouteConstants, max_len: usize, n_labels: usize, rng: &mut Rng) -> RouteGeometry {
    let t43 = t.powf(4.0 / 3.0);
    let lo = (0.5 * rc.lambda * t43).max(0.5 + rc.c_q * t) * (1.0 + 1e-3);
    let cap = (rc.n_eta * rc.l_delta).floor().max(1.0) as usize;
    loop {
        let m = rng.random_range(1..=max_len);
        let labels: Vec<usize> = (0..m).map(|_| rng.random_range(0..n_labels)).collect();
        let far = rng.random_range(1..=m);
        let mut gaps: Vec<f64> = (0..m).map(|_| rng.random_range(lo..2.0 * rc.k0 * t43)).collect();
        gaps[0] = rng.random_range(lo..rc.k0 * t43);
        let g = RouteGeometry { labels, gaps, far, k_star: 1.0 };
        let idx = g.reduced_gap_indices().expect("non-empty");
        if idx.len() > cap {
            continue;
        }
        let raw: f64 = idx.iter().map(|&i| g.gaps[i]).sum();
        let u: f64 = rng.random();
        let k_star = ((raw + u * rc.bracket() * rc.lambda * t43) / t43).min(rc.k0);
        return RouteGeometry { k_star, ..g };
    }
}

/// Largest `N` evaluated by the convolution recursion.
pub const LONG_ROUTE_CAP: usize = 8;
const TAIL_GRID: usize = 240;

#[derive(Debug, Clone, Serialize)]
pub struct LongRouteTail {
    pub eta: f64,
    pub n: usize,
    pub t: f64,
    /// `log F(t;η,N)` from the recursion (Markov-split above the cap).
    pub log_f: f64,
    /// `(N/2) ln 2 + ln erfc(Nη/(4√(2T)))`, `T = t^{-5/3}`.
    pub log_f_closed: f64,
    /// `(ηN)²/32 - 2μ₀√K₀`.
    pub exponent_coef: f64,
    /// `log F - exponent_coef · t^{5/3}`.
    pub log_bound: f64,
    /// Whether `N > cap` and `2^{(N-cap)/2} F(t;η,cap)` was used.
    pub split: bool,
}

/// `log F(t;η,N)` for `F = ∫_{Σv<T} (η/(4√π))^N ∏ v_i^{-3/2} e^{-η²/(32v_i)} dv`.
///
/// Each factor is `√2` times the first-passage density of level `a = η/4`, so
/// `F = 2^{N/2} G_N(T)` with `G₁(s) = P(τ_a < s)` and
/// `G_k(s) = ∫₀^s f_a(u) G_{k-1}(s-u) du`. `G_k` is tabulated on a uniform grid
/// through `s·ln G_k(s)`, which stays bounded as `s → 0`.
pub fn long_route_tail(eta: f64, n: usize, t: f64, p: &ModelParams, k0: f64) -> Result<LongRouteTail> {
    if !(eta > 0.0) || n == 0 || !(t > 0.0) || !(k0 > 0.0) {
        return Err(Error::InvalidParameter(format!("long_route_tail(eta={eta}, N={n}, t={t}, K0={k0})")));
    }
    let big_t = t.powf(-5.0 / 3.0);
    let a = eta / 4.0;
    let n_eval = n.min(LONG_ROUTE_CAP);
    let grid: Vec<f64> = (0..=TAIL_GRID).map(|j| big_t * j as f64 / TAIL_GRID as f64).collect();
    let h_of = |h: &[f64], s: f64| -> f64 {
        let x = s / big_t * TAIL_GRID as f64;
        let j = (x.floor() as usize).min(TAIL_GRID - 1);
        let w = x - j as f64;
        let v = (1.0 - w) * h[j] + w * h[j + 1];
        if s > 0.0 {
            v / s
        } else {
            f64::NEG_INFINITY
        }
    };
    let extrapolate = |h: &mut Vec<f64>| h[0] = 2.0 * h[1] - h[2];
    // h_k(s_j) = s_j ln G_k(s_j)
    let mut h: Vec<f64> = grid.iter().map(|&s| s * ln_fp_cdf_quad(a, s)).collect();
    extrapolate(&mut h);
    for _ in 2..=n_eval {
        let prev = h.clone();
        h = grid
            .iter()
            .map(|&s| {
                if s == 0.0 {
                    return 0.0;
                }
                let lg = ln_integral_unimodal(
                    |u| {
                        if u <= 0.0 || u >= s {
                            f64::NEG_INFINITY
                        } else {
                            ln_first_passage_density(a, u) + h_of(&prev, s - u)
                        }
                    },
                    0.0,
                    s,
                    1e-9,
                );
                s * lg
            })
            .collect();
        extrapolate(&mut h);
    }
    let ln_g = h[TAIL_GRID] / big_t;
    if !ln_g.is_finite() {
        return Err(Error::Quadrature(format!("non-finite recursion value at N = {n_eval}")));
    }
    let ln2 = std::f64::consts::LN_2;
    let log_f = 0.5 * n as f64 * ln2 + ln_g;
    let log_f_closed = 0.5 * n as f64 * ln2 + ln_erfc(n as f64 * a / (2.0 * big_t).sqrt());
    let exponent_coef = (eta * n as f64).powi(2) / 32.0 - 2.0 * p.mu0() * k0.sqrt();
    Ok(LongRouteTail {
        eta,
        n,
        t,
        log_f,
        log_f_closed,
        exponent_coef,
        log_bound: log_f - exponent_coef * t.powf(5.0 / 3.0),
        split: n > n_eval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;
    use crate::hypbm::first_passage_density;

    #[test]
    fn killed_first_passage_matches_quadrature() {
        let (a, c, t) = (3.0, 0.7, 5.0);
        let q = integrate(|u| first_passage_density(a, u) * (-c * u).exp(), 0.0, t, 0.0, 1e-12);
        assert!((ln_killed_first_passage(a, c, t) - q.ln()).abs() < 1e-9);
    }

    #[test]
    fn tail_recursion_matches_closed_form() {
        let p = ModelParams::new(2, 1.0).unwrap();
        for n in [1, 2, 4] {
            let r = long_route_tail(0.3, n, 20.0, &p, 1.0).unwrap();
            assert!((r.log_f - r.log_f_closed).abs() < 2e-3 * (1.0 + r.log_f_closed.abs()), "{r:?}");
        }
    }
}
