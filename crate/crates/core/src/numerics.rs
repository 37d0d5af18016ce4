//! Quadrature, one-dimensional optimisation, dense factorisations and splines.

use crate::error::{Error, Result};

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&f, lo, hi);
    let mut segs = vec![(lo, hi, v, e)];
    let mut total = v;
    let mut err = e;
    let mut iters = 0;
    while err > abs_tol.max(rel_tol * total.abs()) && iters < 5000 {
        iters += 1;
        let (k, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (sa, sb, sv, se) = segs.swap_remove(k);
        let m = 0.5 * (sa + sb);
        let (v1, e1) = gk15(&f, sa, m);
        let (v2, e2) = gk15(&f, m, sb);
        total += v1 + v2 - sv;
        err += e1 + e2 - se;
        segs.push((sa, m, v1, e1));
        segs.push((m, sb, v2, e2));
    }
    // Re-sum to remove drift from incremental updates.
    sign * segs.iter().map(|s| s.2).sum::<f64>()
}

/// Integral over `[a, ∞)` through the map `x = a + u/(1-u)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    integrate(
        |u: f64| {
            if u >= 1.0 {
                return 0.0;
            }
            let w = 1.0 - u;
            let v = f(a + u / w) / (w * w);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// `ln ∫_a^b e^{φ(u)} du` for unimodal `φ`, robust to integrands far outside
/// the `f64` range. The peak is located first; each side is then integrated
/// on segments of doubling length, starting at the distance where `φ` has
/// dropped by one, until the integrand is negligible.
pub fn ln_integral_unimodal<F: Fn(f64) -> f64>(phi: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if !(b > a) {
        return f64::NEG_INFINITY;
    }
    let safe = |u: f64| {
        let v = phi(u);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (x, m) = grid_golden_max(safe, a, b, 64, 1e-14 * (b - a));
    if !m.is_finite() {
        return m;
    }
    let g = |u: f64| (safe(u) - m).exp();
    let mut total = 0.0;
    for end in [a, b] {
        let span = (end - x).abs();
        if span == 0.0 {
            continue;
        }
        let dir = (end - x).signum();
        let at = |s: f64| x + dir * s;
        let mut w = span;
        if safe(end) < m - 1.0 {
            let (mut lo, mut hi) = (0.0, span);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if safe(at(mid)) >= m - 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            w = hi;
        }
        let (mut s0, mut len) = (0.0, w.max(1e-12 * span));
        loop {
            let s1 = (s0 + len).min(span);
            let (p, q) = if dir > 0.0 { (at(s0), at(s1)) } else { (at(s1), at(s0)) };
            total += integrate(g, p, q, 0.0, rel_tol);
            if s1 >= span || g(at(s1)) < 1e-20 {
                break;
            }
            s0 = s1;
            len *= 2.0;
        }
    }
    m + total.ln()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed Gauss-Legendre rule mapped to `[a, b]`.
pub struct GaussRule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self { x, w }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.x.iter().zip(&self.w).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximisation of a unimodal function on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Grid scan followed by golden-section refinement around the best grid cell.
pub fn grid_golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize, tol: f64) -> (f64, f64) {
    let h = (b - a) / n as f64;
    let mut best = (a, f64::NEG_INFINITY);
    for i in 0..=n {
        let x = a + h * i as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - h).max(a);
    let hi = (best.0 + h).min(b);
    let r = golden_max(&mut f, lo, hi, tol);
    if r.1 >= best.1 {
        r
    } else {
        best
    }
}

/// `ln erfc(x)`, accurate in the far tail where `erfc` underflows.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 25.0 {
        statrs::function::erf::erfc(x).ln()
    } else {
        let x2 = x * x;
        let series = 1.0 - 0.5 / x2 + 0.75 / (x2 * x2) - 1.875 / (x2 * x2 * x2);
        -x2 - (x * std::f64::consts::PI.sqrt()).ln() + series.ln()
    }
}

pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

/// Dense lower-triangular factor, row-major `n×n`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    pub n: usize,
    pub l: Vec<f64>,
    pub jitter: f64,
}

fn try_cholesky(a: &[f64], n: usize, jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            if i == j {
                s += jitter;
            }
            let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

impl Cholesky {
    /// Factor a symmetric PSD matrix. Tries no jitter, then `1e-14·scale`
    /// growing by 10× per attempt until `cap`; beyond it is an error.
    pub fn factor(a: &[f64], n: usize, scale: f64, cap: f64) -> Result<Self> {
        if let Some(l) = try_cholesky(a, n, 0.0) {
            return Ok(Self { n, l, jitter: 0.0 });
        }
        let mut jitter = 1e-14 * scale;
        while jitter <= cap * (1.0 + 1e-12) {
            if let Some(l) = try_cholesky(a, n, jitter) {
                return Ok(Self { n, l, jitter });
            }
            jitter *= 10.0;
        }
        Err(Error::Factorization { jitter, cap })
    }

    /// `L·z`.
    pub fn mul(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| self.l[i * n..i * n + i + 1].iter().zip(z).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Solve `L·y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = self.l[i * n..i * n + i].iter().zip(&y).map(|(a, b)| a * b).sum();
            y[i] = (b[i] - s) / self.l[i * n + i];
        }
        y
    }

    /// Solve `Lᵀ·x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }

    /// Solve `A·x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }
}

/// Pivoted (low-rank) Cholesky: `P A Pᵀ ≈ L Lᵀ`, stopping once the largest
/// remaining diagonal falls below `tol`. Returns columns of `L` in original
/// row order, so a sample is `Σ_k col_k z_k`.
pub fn pivoted_cholesky(a: &[f64], n: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];
    loop {
        let (p, dmax) = diag
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .fold((usize::MAX, 0.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        if p == usize::MAX || dmax <= tol {
            break;
        }
        used[p] = true;
        let piv = dmax.sqrt();
        let mut col = vec![0.0; n];
        for i in 0..n {
            if used[i] && i != p {
                continue;
            }
            let mut s = a[i * n + p];
            for c in &cols {
                s -= c[i] * c[p];
            }
            col[i] = s / piv;
        }
        col[p] = piv;
        for i in 0..n {
            if !used[i] {
                diag[i] -= col[i] * col[i];
            }
        }
        diag[p] = 0.0;
        cols.push(col);
        if cols.len() == n {
            break;
        }
    }
    cols
}

/// Clamped cubic spline on a uniform grid.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at knots
}

impl CubicSpline {
    /// `y` sampled at `x0 + i·h`; end slopes `d0`, `dn` are imposed.
    pub fn clamped(x0: f64, h: f64, y: Vec<f64>, d0: f64, dn: f64) -> Self {
        let n = y.len();
        assert!(n >= 3);
        // Tridiagonal system for second derivatives.
        let mut a = vec![h / 6.0; n];
        let mut b = vec![2.0 * h / 3.0; n];
        let mut c = vec![h / 6.0; n];
        let mut r = vec![0.0; n];
        b[0] = h / 3.0;
        c[0] = h / 6.0;
        r[0] = (y[1] - y[0]) / h - d0;
        b[n - 1] = h / 3.0;
        a[n - 1] = h / 6.0;
        r[n - 1] = dn - (y[n - 1] - y[n - 2]) / h;
        for i in 1..n - 1 {
            r[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
        }
        // Thomas algorithm.
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = r[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
        }
        Self { x0, h, y, m }
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.y.len();
        let s = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        (i, s - i as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        let h = self.h;
        let (a, b) = (1.0 - t, t);
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        let h = self.h;
        let (a, b) = (1.0 - t, t);
        (self.y[i + 1] - self.y[i]) / h
            + (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        (1.0 - t) * self.m[i] + t * self.m[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_and_gaussian() {
        let v = integrate(|x| x * x * x - x, 0.0, 2.0, 1e-13, 1e-13);
        assert!((v - 2.0).abs() < 1e-12);
        let g = integrate_to_inf(|x| (-x * x).exp(), 0.0, 1e-12, 1e-12);
        assert!((g - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn legendre_rule_is_exact_for_high_degree() {
        let r = GaussRule::new(20);
        let v = r.integrate(|x| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-13);
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = grid_golden_max(|x| -(x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 10, 1e-10);
        assert!((x - 0.3).abs() < 1e-8 && (v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ln_erfc_branches_agree() {
        for &x in &[20.0, 24.9] {
            let asym = {
                let x2: f64 = x * x;
                -x2 - (x * std::f64::consts::PI.sqrt()).ln()
                    + (1.0 - 0.5 / x2 + 0.75 / (x2 * x2) - 1.875 / (x2 * x2 * x2)).ln()
            };
            assert!((ln_erfc(x) - asym).abs() < 1e-9);
        }
        assert!(ln_erfc(100.0).is_finite());
    }

    #[test]
    fn cholesky_solves() {
        let a = [4.0, 2.0, 0.6, 2.0, 2.0, 0.5, 0.6, 0.5, 3.0];
        let c = Cholesky::factor(&a, 3, 1.0, 1e-8).unwrap();
        let x = c.solve(&[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn pivoted_cholesky_reconstructs_rank_deficient() {
        // Rank-2 matrix v vᵀ + w wᵀ.
        let v = [1.0, 2.0, 3.0, 4.0];
        let w = [0.5, -1.0, 0.0, 2.0];
        let mut a = vec![0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                a[i * 4 + j] = v[i] * v[j] + w[i] * w[j];
            }
        }
        let cols = pivoted_cholesky(&a, 4, 1e-12);
        assert_eq!(cols.len(), 2);
        for i in 0..4 {
            for j in 0..4 {
                let r: f64 = cols.iter().map(|c| c[i] * c[j]).sum();
                assert!((r - a[i * 4 + j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn spline_reproduces_cubic_with_matching_slopes() {
        let f = |x: f64| 1.0 - 3.0 * x * x + 2.0 * x * x * x;
        let y: Vec<f64> = (0..11).map(|i| f(i as f64 * 0.1)).collect();
        let s = CubicSpline::clamped(0.0, 0.1, y, 0.0, 0.0);
        for k in 0..100 {
            let x = k as f64 * 0.01;
            assert!((s.eval(x) - f(x)).abs() < 1e-12);
            assert!((s.deriv(x) - (-6.0 * x + 6.0 * x * x)).abs() < 1e-10);
        }
    }
}
