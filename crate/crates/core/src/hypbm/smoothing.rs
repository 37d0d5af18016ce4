//! Smoothed radius `f(R)` used to compare the radial process with a 1D Brownian
//! motion, and its drift bound `C_Q`.

use serde::{Deserialize, Serialize};

/// `f = (a+b)/2` on `[0,a]`, `f(x) = x` on `[b,∞)`, `f'` a cubic smoothstep on
/// `[a,b]`. `f` is C², non-decreasing, with `f' ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingFn {
    pub a: f64,
    pub b: f64,
}

impl Default for SmoothingFn {
    fn default() -> Self {
        Self { a: 0.25, b: 0.75 }
    }
}

impl SmoothingFn {
    fn u(&self, x: f64) -> f64 {
        ((x - self.a) / (self.b - self.a)).clamp(0.0, 1.0)
    }

    pub fn value(&self, x: f64) -> f64 {
        let w = self.b - self.a;
        if x >= self.b {
            return x;
        }
        let u = self.u(x);
        // ∫ smoothstep = w·(u³ - u⁴/2).
        0.5 * (self.a + self.b) + w * (u * u * u - 0.5 * u * u * u * u)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let u = self.u(x);
        u * u * (3.0 - 2.0 * u)
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let u = self.u(x);
        6.0 * u * (1.0 - u) / (self.b - self.a)
    }

    /// `sup_{x ≥ 0} (d-1)f'(x)coth x + f''(x)`.
    ///
    /// On `[b,∞)` the expression is `(d-1)coth x`, largest at `b`; the blend
    /// region is scanned on a fine grid and refined.
    pub fn c_q(&self, d: usize) -> f64 {
        let dm1 = d as f64 - 1.0;
        let g = |x: f64| dm1 * self.deriv(x) / x.tanh() + self.second_deriv(x);
        let (_, inner) = crate::numerics::grid_golden_max(g, self.a, self.b, 2000, 1e-12);
        inner.max(dm1 / self.b.tanh())
    }
}

/// `C_Q` for the default smoothing function.
pub fn c_q(d: usize) -> f64 {
    SmoothingFn::default().c_q(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_continuity() {
        let f = SmoothingFn::default();
        assert_eq!(f.value(0.0), 0.5);
        assert_eq!(f.value(0.25), 0.5);
        assert!((f.value(0.75 - 1e-12) - 0.75).abs() < 1e-9);
        assert_eq!(f.value(3.0), 3.0);
        let h = 1e-6;
        for &x in &[0.3, 0.5, 0.7] {
            let fd = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
            assert!((fd - f.deriv(x)).abs() < 1e-6);
            let sd = (f.deriv(x + h) - f.deriv(x - h)) / (2.0 * h);
            assert!((sd - f.second_deriv(x)).abs() < 1e-5);
            assert!(f.deriv(x) <= 1.0);
        }
    }

    #[test]
    fn c_q_brute_force() {
        let f = SmoothingFn::default();
        for d in 2..=4 {
            let dm1 = d as f64 - 1.0;
            let brute = (1..200_000)
                .map(|i| i as f64 * 1e-4)
                .map(|x| dm1 * f.deriv(x) / x.tanh() + f.second_deriv(x))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((c_q(d) - brute).abs() < 1e-6, "d={d}: {} vs {brute}", c_q(d));
        }
    }
}
