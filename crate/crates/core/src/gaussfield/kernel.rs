//! Covariance kernels built as autocorrelations of compactly supported bumps.
//!
//! `C(ρ) = ∫ k(d(x,z)) k(d(y,z)) vol(dz)` for `d(x,y) = ρ`, with `k` supported
//! in radius `a = R₀/2`. The double integral is done in geodesic polar
//! coordinates around `x`; the hyperbolic law of cosines gives `d(y,z)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgeo::sphere_area;
use crate::numerics::{CubicSpline, GaussRule};

/// Bump profile on `[0, 1]` (argument is `r/a`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BumpShape {
    /// `(1 - u²)^power`; C² at the support boundary requires `power ≥ 3`.
    Poly { power: u32 },
    /// `exp(-1/(1 - u²))`.
    Exp,
}

impl Default for BumpShape {
    fn default() -> Self {
        BumpShape::Poly { power: 3 }
    }
}

impl BumpShape {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(BumpShape::Exp),
            _ => {
                let p = s
                    .strip_prefix("poly")
                    .and_then(|r| r.parse::<u32>().ok())
                    .ok_or_else(|| Error::InvalidBump(format!("unknown kernel '{s}' (poly<N> or exp)")))?;
                Ok(BumpShape::Poly { power: p })
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            BumpShape::Poly { power } => format!("poly{power}"),
            BumpShape::Exp => "exp".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BumpShape::Poly { power } if *power < 3 => {
                Err(Error::InvalidBump(format!("(1-u²)^{power} is not C² at the support edge")))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u * u;
        match self {
            BumpShape::Poly { power } => w.powi(*power as i32),
            BumpShape::Exp => (-1.0 / w).exp(),
        }
    }
}

/// Grid intervals of the tabulated kernel on `[0, R₀]`.
pub const TABLE_INTERVALS: usize = 512;
const QUAD_NODES: usize = 40;
const R_SUBSEGMENTS: usize = 4;

/// Stationary covariance `(σ², R₀, bump)` on `H^d`.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceSpec {
    pub sigma2: f64,
    pub r0: f64,
    pub shape: BumpShape,
    pub d: usize,
    #[serde(skip)]
    table: CubicSpline,
    #[serde(skip)]
    raw_c0: f64,
}

/// Un-normalised autocorrelation at distance `rho`.
fn autocorrelation(shape: BumpShape, a: f64, d: usize, rho: f64, rule: &GaussRule) -> f64 {
    if rho >= 2.0 * a {
        return 0.0;
    }
    let kk = |r: f64| shape.eval(r / a);
    let ang_power = d as i32 - 2;
    let s_d2 = sphere_area(d - 1);
    let full_angle = rule.integrate(|th: f64| th.sin().powi(ang_power), 0.0, std::f64::consts::PI);
    let (ch, sh) = (rho.cosh(), rho.sinh());
    let cosh_a = a.cosh();
    let inner = |r: f64| -> f64 {
        if rho < 1e-12 {
            return kk(r) * full_angle;
        }
        let (cr, sr) = (r.cosh(), r.sinh());
        let cmin = (ch * cr - cosh_a) / (sh * sr);
        if cmin >= 1.0 {
            return 0.0;
        }
        let th_max = if cmin <= -1.0 { std::f64::consts::PI } else { cmin.acos() };
        rule.integrate(
            |th: f64| {
                let cd = (ch * cr - sh * sr * th.cos()).max(1.0);
                kk(cd.acosh()) * th.sin().powi(ang_power)
            },
            0.0,
            th_max,
        )
    };
    let outer = |r: f64| kk(r) * r.sinh().powi(d as i32 - 1) * inner(r);
    // Breakpoints where the angular range changes regime.
    let mut knots = vec![(rho - a).max(0.0), (a - rho).abs().min(a), a];
    knots.sort_by(|x, y| x.total_cmp(y));
    knots.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    let mut total = 0.0;
    let mut lo = knots[0];
    for &hi in &knots[1..] {
        let h = (hi - lo) / R_SUBSEGMENTS as f64;
        for k in 0..R_SUBSEGMENTS {
            total += rule.integrate(outer, lo + h * k as f64, lo + h * (k + 1) as f64);
        }
        lo = hi;
    }
    s_d2 * total
}

/// Build a covariance spec by tabulating the bump autocorrelation.
pub fn make_spec(sigma2: f64, r0: f64, shape: BumpShape, d: usize) -> Result<CovarianceSpec> {
    if !(sigma2 > 0.0) || !(r0 > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma2 = {sigma2}, R0 = {r0}")));
    }
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d = {d} < 2")));
    }
    shape.validate()?;
    let a = r0 / 2.0;
    let rule = GaussRule::new(QUAD_NODES);
    let h = r0 / TABLE_INTERVALS as f64;
    let raw: Vec<f64> = (0..=TABLE_INTERVALS).map(|i| autocorrelation(shape, a, d, i as f64 * h, &rule)).collect();
    let raw_c0 = raw[0];
    if !(raw_c0 > 0.0) {
        return Err(Error::InvalidBump("bump has zero mass".into()));
    }
    let y: Vec<f64> = raw.iter().map(|v| v * sigma2 / raw_c0).collect();
    let table = CubicSpline::clamped(0.0, h, y, 0.0, 0.0);
    Ok(CovarianceSpec { sigma2, r0, shape, d, table, raw_c0 })
}

impl CovarianceSpec {
    /// `C(ρ)`; exactly zero for `ρ ≥ R₀`.
    #[inline]
    pub fn cov(&self, rho: f64) -> f64 {
        if rho >= self.r0 {
            0.0
        } else {
            self.table.eval(rho.max(0.0))
        }
    }

    pub fn cov_deriv(&self, rho: f64) -> f64 {
        if rho >= self.r0 {
            0.0
        } else {
            self.table.deriv(rho.max(0.0))
        }
    }

    pub fn cov_second_deriv(&self, rho: f64) -> f64 {
        if rho >= self.r0 {
            0.0
        } else {
            self.table.second_deriv(rho.max(0.0))
        }
    }

    /// Direct (untabulated) evaluation, for accuracy checks.
    pub fn cov_direct(&self, rho: f64) -> f64 {
        let rule = GaussRule::new(QUAD_NODES);
        autocorrelation(self.shape, self.r0 / 2.0, self.d, rho, &rule) * self.sigma2 / self.raw_c0
    }

    /// Same spec with variance rescaled.
    pub fn with_sigma2(&self, sigma2: f64) -> CovarianceSpec {
        let mut s = self.clone();
        let f = sigma2 / self.sigma2;
        let h = self.r0 / TABLE_INTERVALS as f64;
        let y: Vec<f64> = (0..=TABLE_INTERVALS).map(|i| self.table.eval(i as f64 * h) * f).collect();
        s.table = CubicSpline::clamped(0.0, h, y, 0.0, 0.0);
        s.sigma2 = sigma2;
        s
    }
}
