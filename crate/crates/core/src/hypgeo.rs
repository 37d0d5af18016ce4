//! Hyperbolic geometry in the hyperboloid model `{x : -x0² + |x̄|² = -1, x0 > 0}`.
//!
//! Curvature is fixed to -1. Distances use `arccosh(-⟨x,y⟩)`, clamped at 1, with
//! the equivalent `2·asinh(|x-y|_M / 2)` form at short range. The Poincaré ball
//! appears only as a cross-check and as a hashing chart for neighbour queries.

use std::collections::HashMap;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics;
use crate::rng::{self, Rng};

/// Geometry tolerances.
pub mod tol {
    /// Relative tolerance on `⟨x,x⟩ = -1` (relative to `x0²`).
    pub const NORM: f64 = 1e-10;
    /// Points closer than this are treated as equal.
    pub const DEGENERATE: f64 = 1e-12;
    /// Relative tolerance of [`super::ball_volume`] quadrature.
    pub const VOLUME_REL: f64 = 1e-10;
}

/// Point of `H^d`, stored as `d+1` hyperboloid coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub coords: Vec<f64>,
}

#[inline]
pub fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

impl HPoint {
    pub fn origin(d: usize) -> Self {
        let mut coords = vec![0.0; d + 1];
        coords[0] = 1.0;
        Self { coords }
    }

    /// Validating constructor.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let p = Self { coords };
        p.validate()?;
        Ok(p)
    }

    /// Lift spatial coordinates `x̄` onto the hyperboloid.
    pub fn from_spatial(xbar: &[f64]) -> Self {
        let x0 = (1.0 + xbar.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let mut coords = Vec::with_capacity(xbar.len() + 1);
        coords.push(x0);
        coords.extend_from_slice(xbar);
        Self { coords }
    }

    /// Point at distance `r` from the origin in unit direction `dir ∈ S^{d-1}`.
    pub fn polar(r: f64, dir: &[f64]) -> Self {
        let s = r.sinh();
        let mut coords = Vec::with_capacity(dir.len() + 1);
        coords.push(r.cosh());
        coords.extend(dir.iter().map(|u| s * u));
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn x0(&self) -> f64 {
        self.coords[0]
    }

    pub fn spatial(&self) -> &[f64] {
        &self.coords[1..]
    }

    pub fn validate(&self) -> Result<()> {
        if self.coords.len() < 2 {
            return Err(Error::InvalidParameter("HPoint needs d ≥ 1".into()));
        }
        let dev = minkowski(&self.coords, &self.coords) + 1.0;
        let scale = self.x0().abs().max(1.0).powi(2);
        if !dev.is_finite() || dev.abs() > tol::NORM * scale || self.x0() < 1.0 - tol::NORM {
            return Err(Error::InvalidPoint(dev));
        }
        Ok(())
    }

    /// Re-project onto the hyperboloid by recomputing `x0` from `x̄`.
    pub fn renormalize(&mut self) {
        let s: f64 = self.coords[1..].iter().map(|v| v * v).sum();
        self.coords[0] = (1.0 + s).sqrt();
    }

    /// Poincaré-ball coordinates `x̄ / (1 + x0)`.
    pub fn to_poincare(&self) -> Vec<f64> {
        let w = 1.0 + self.x0();
        self.spatial().iter().map(|v| v / w).collect()
    }

    pub fn from_poincare(p: &[f64]) -> Self {
        let n2: f64 = p.iter().map(|v| v * v).sum();
        let w = 1.0 - n2;
        let mut coords = Vec::with_capacity(p.len() + 1);
        coords.push((1.0 + n2) / w);
        coords.extend(p.iter().map(|v| 2.0 * v / w));
        Self { coords }
    }

    /// Distance from the origin.
    pub fn radius(&self) -> f64 {
        self.x0().max(1.0).acosh()
    }
}

/// Hyperbolic distance. Both points are assumed valid.
pub fn distance(x: &HPoint, y: &HPoint) -> f64 {
    distance_raw(&x.coords, &y.coords)
}

#[inline]
pub fn distance_raw(x: &[f64], y: &[f64]) -> f64 {
    let c = -minkowski(x, y);
    if c < 2.0 {
        // |x-y|_M² = 2(c-1), evaluated from differences to avoid cancellation.
        let d0 = x[0] - y[0];
        let q: f64 = x[1..].iter().zip(&y[1..]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() - d0 * d0;
        2.0 * (0.5 * q.max(0.0).sqrt()).asinh()
    } else {
        c.max(1.0).acosh()
    }
}

/// Validating distance.
pub fn try_distance(x: &HPoint, y: &HPoint) -> Result<f64> {
    x.validate()?;
    y.validate()?;
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    Ok(distance(x, y))
}

/// Distance in the Poincaré ball model (cross-check only).
pub fn poincare_distance(p: &[f64], q: &[f64]) -> f64 {
    let pq: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
    let np: f64 = p.iter().map(|v| v * v).sum();
    let nq: f64 = q.iter().map(|v| v * v).sum();
    let arg = 2.0 * pq / ((1.0 - np) * (1.0 - nq));
    // arccosh(1 + a) = ln(1 + a + sqrt(a(a+2))), stable for small a.
    (arg + (arg * (arg + 2.0)).sqrt()).ln_1p()
}

/// Apply the boost taking the origin to `x` to the point `y`.
pub fn boost(x: &HPoint, y: &[f64]) -> HPoint {
    let xb = x.spatial();
    let yb = &y[1..];
    let dot: f64 = xb.iter().zip(yb).map(|(a, b)| a * b).sum();
    let k = dot / (1.0 + x.x0());
    let mut coords = Vec::with_capacity(y.len());
    coords.push(x.x0() * y[0] + dot);
    for i in 0..xb.len() {
        coords.push(xb[i] * y[0] + yb[i] + xb[i] * k);
    }
    let mut p = HPoint { coords };
    p.renormalize();
    p
}

/// Tangent vector at `x` whose coordinates in the boosted orthonormal frame are `w`.
pub fn tangent_from_frame(x: &HPoint, w: &[f64]) -> Vec<f64> {
    let xb = x.spatial();
    let dot: f64 = xb.iter().zip(w).map(|(a, b)| a * b).sum();
    let k = dot / (1.0 + x.x0());
    let mut v = Vec::with_capacity(w.len() + 1);
    v.push(dot);
    for i in 0..w.len() {
        v.push(w[i] + xb[i] * k);
    }
    v
}

/// Length of a tangent vector `v` at `x`.
///
/// Uses `⟨v,v⟩ = (|v̄|² + |x̄∧v̄|²)/x₀²` (valid when `⟨x,v⟩ = 0`), which has no
/// cancellation far from the origin, unlike `v̄·v̄ - v₀²`.
pub fn tangent_norm(x: &HPoint, v: &[f64]) -> f64 {
    let (xs, vs) = (x.spatial(), &v[1..]);
    let mut s = vs.iter().map(|a| a * a).sum::<f64>();
    for i in 0..xs.len() {
        for j in 0..i {
            let w = xs[i] * vs[j] - xs[j] * vs[i];
            s += w * w;
        }
    }
    s.sqrt() / x.x0()
}

/// Exponential map at `x` of a tangent vector `v` (with `⟨x,v⟩ = 0`).
pub fn exp_map(x: &HPoint, v: &[f64]) -> HPoint {
    let n = tangent_norm(x, v);
    if n < tol::DEGENERATE {
        return x.clone();
    }
    let (c, s) = (n.cosh(), n.sinh() / n);
    let coords = x.coords.iter().zip(v).map(|(a, b)| c * a + s * b).collect();
    let mut p = HPoint { coords };
    p.renormalize();
    p
}

/// Logarithm map: tangent vector at `x` pointing to `y` with length `d(x,y)`.
pub fn log_map(x: &HPoint, y: &HPoint) -> Vec<f64> {
    let d = distance(x, y);
    // v ∝ y + ⟨x,y⟩x, rescaled to length d.
    let c = -minkowski(&x.coords, &y.coords);
    let mut v: Vec<f64> = y.coords.iter().zip(&x.coords).map(|(yi, xi)| yi - c * xi).collect();
    let n = tangent_norm(x, &v);
    if n < tol::DEGENERATE {
        return vec![0.0; x.coords.len()];
    }
    v.iter_mut().for_each(|a| *a *= d / n);
    v
}

/// Constant-speed geodesic from `x` (s=0) to `y` (s=1).
pub fn geodesic_point(x: &HPoint, y: &HPoint, s: f64) -> HPoint {
    let d = distance(x, y);
    if d < tol::DEGENERATE {
        return x.clone();
    }
    if d < 1e-6 {
        let v = log_map(x, y);
        let w: Vec<f64> = v.iter().map(|a| a * s).collect();
        return exp_map(x, &w);
    }
    let sd = d.sinh();
    let (a, b) = (((1.0 - s) * d).sinh() / sd, (s * d).sinh() / sd);
    let coords = x.coords.iter().zip(&y.coords).map(|(p, q)| a * p + b * q).collect();
    let mut p = HPoint { coords };
    p.renormalize();
    p
}

/// Validating geodesic point; `x = y` is reported as degenerate.
pub fn try_geodesic_point(x: &HPoint, y: &HPoint, s: f64) -> Result<HPoint> {
    x.validate()?;
    y.validate()?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("s = {s} outside [0,1]")));
    }
    if distance(x, y) < tol::DEGENERATE {
        return Err(Error::InvalidParameter("degenerate endpoints".into()));
    }
    Ok(geodesic_point(x, y, s))
}

/// Unit-speed geodesic segment.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicSegment {
    pub endpoints: (HPoint, HPoint),
    pub length: f64,
}

impl GeodesicSegment {
    pub fn new(a: HPoint, b: HPoint) -> Self {
        let length = distance(&a, &b);
        Self { endpoints: (a, b), length }
    }

    /// Point at arc length `s ∈ [0, length]`.
    pub fn point_at(&self, s: f64) -> HPoint {
        if self.length < tol::DEGENERATE {
            return self.endpoints.0.clone();
        }
        geodesic_point(&self.endpoints.0, &self.endpoints.1, s / self.length)
    }
}

/// Area of the unit sphere `S^{n-1}` in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / statrs::function::gamma::gamma(h)
}

/// `∫₀^r sinh^n(ρ) dρ` in closed form (reduction formula).
pub fn sinh_power_integral(r: f64, n: usize) -> f64 {
    match n {
        0 => r,
        1 => r.cosh() - 1.0,
        _ => {
            let nf = n as f64;
            r.sinh().powi(n as i32 - 1) * r.cosh() / nf - (nf - 1.0) / nf * sinh_power_integral(r, n - 2)
        }
    }
}

/// Volume of a geodesic ball of radius `R` in `H^d`, by adaptive quadrature.
pub fn ball_volume(r: f64, d: usize) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let k = d as i32 - 1;
    sphere_area(d) * numerics::integrate(|p: f64| p.sinh().powi(k), 0.0, r, 0.0, tol::VOLUME_REL)
}

pub fn try_ball_volume(r: f64, d: usize) -> Result<f64> {
    if !(r > 0.0) || d < 2 {
        return Err(Error::InvalidParameter(format!("ball_volume(R={r}, d={d})")));
    }
    Ok(ball_volume(r, d))
}

/// Uniform direction on `S^{d-1}`.
pub fn random_direction(d: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

/// Radius with density `∝ sinh^{d-1}(ρ)` on `[a, b]` (volume-uniform shell radius).
pub fn sample_shell_radius(a: f64, b: f64, d: usize, rng: &mut Rng) -> f64 {
    let n = d - 1;
    let fa = sinh_power_integral(a, n);
    let fb = sinh_power_integral(b, n);
    let target = fa + rng.random::<f64>() * (fb - fa);
    let (mut lo, mut hi) = (a, b);
    for _ in 0..80 {
        let m = 0.5 * (lo + hi);
        if sinh_power_integral(m, n) < target {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Packing region: ball or annulus around a centre.
#[derive(Debug, Clone, Serialize)]
pub enum Region {
    Ball { center: HPoint, radius: f64 },
    Annulus { center: HPoint, inner: f64, outer: f64 },
}

impl Region {
    pub fn ball_at_origin(d: usize, radius: f64) -> Self {
        Region::Ball { center: HPoint::origin(d), radius }
    }

    pub fn center(&self) -> &HPoint {
        match self {
            Region::Ball { center, .. } | Region::Annulus { center, .. } => center,
        }
    }

    pub fn radii(&self) -> (f64, f64) {
        match self {
            Region::Ball { radius, .. } => (0.0, *radius),
            Region::Annulus { inner, outer, .. } => (*inner, *outer),
        }
    }

    pub fn dim(&self) -> usize {
        self.center().dim()
    }

    pub fn contains(&self, x: &HPoint) -> bool {
        let (a, b) = self.radii();
        let r = distance(self.center(), x);
        r >= a && r <= b
    }

    pub fn volume(&self) -> f64 {
        let (a, b) = self.radii();
        let d = self.dim();
        if b <= a {
            return 0.0;
        }
        sphere_area(d) * (sinh_power_integral(b, d - 1) - sinh_power_integral(a, d - 1))
    }

    /// Volume-uniform random point.
    pub fn sample(&self, rng: &mut Rng) -> HPoint {
        let (a, b) = self.radii();
        let d = self.dim();
        let r = sample_shell_radius(a, b, d, rng);
        let u = random_direction(d, rng);
        boost(self.center(), &HPoint::polar(r, &u).coords)
    }

    /// Region with radii moved inward by `s` (the `s`-shrunken region).
    pub fn shrunk(&self, s: f64) -> Region {
        match self {
            Region::Ball { center, radius } => Region::Ball { center: center.clone(), radius: (radius - s).max(0.0) },
            Region::Annulus { center, inner, outer } => Region::Annulus {
                center: center.clone(),
                inner: inner + s,
                outer: (outer - s).max(inner + s),
            },
        }
    }
}

/// Neighbour index keyed on a Euclidean grid in the Poincaré chart.
///
/// Uses `|p - q| ≤ sinh(d/2)·sqrt(1-|p|²)` for points at hyperbolic distance `d`,
/// so a query only needs the cells inside that Euclidean radius.
#[derive(Debug, Clone)]
pub struct PointIndex {
    cell: f64,
    map: HashMap<Vec<i64>, Vec<usize>>,
    chart: Vec<Vec<f64>>,
}

impl PointIndex {
    pub fn new(query_radius: f64) -> Self {
        Self { cell: (query_radius / 2.0).sinh().max(1e-6), map: HashMap::new(), chart: Vec::new() }
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        p.iter().map(|v| (v / self.cell).floor() as i64).collect()
    }

    /// Insert a point; its index is the insertion count.
    pub fn insert(&mut self, x: &HPoint) -> usize {
        let p = x.to_poincare();
        let id = self.chart.len();
        self.map.entry(self.key(&p)).or_default().push(id);
        self.chart.push(p);
        id
    }

    pub fn len(&self) -> usize {
        self.chart.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chart.is_empty()
    }

    /// Candidate ids that may lie within hyperbolic distance `rho` of `x`.
    pub fn candidates(&self, x: &HPoint, rho: f64) -> Vec<usize> {
        let p = x.to_poincare();
        let n2: f64 = p.iter().map(|v| v * v).sum();
        let e = (rho / 2.0).sinh() * (1.0 - n2).max(0.0).sqrt();
        let lo: Vec<i64> = p.iter().map(|v| ((v - e) / self.cell).floor() as i64).collect();
        let hi: Vec<i64> = p.iter().map(|v| ((v + e) / self.cell).floor() as i64).collect();
        let mut out = Vec::new();
        let mut key = lo.clone();
        loop {
            if let Some(ids) = self.map.get(&key) {
                out.extend_from_slice(ids);
            }
            // Odometer increment over the cell box.
            let mut k = 0;
            loop {
                if k == key.len() {
                    return out;
                }
                key[k] += 1;
                if key[k] <= hi[k] {
                    break;
                }
                key[k] = lo[k];
                k += 1;
            }
        }
    }
}

/// Packing of `radius`-balls (centres pairwise `> 2·radius` apart) in a region.
#[derive(Debug, Clone, Serialize)]
pub struct Packing {
    pub centers: Vec<HPoint>,
    pub radius: f64,
    pub region: Region,
}

/// Candidates per unit `radius`-ball volume of the region.
pub const PACKING_CANDIDATE_FACTOR: f64 = 60.0;

/// Randomised greedy maximal packing.
///
/// Volume-uniform candidates are inserted whenever they are more than `2r` from
/// every accepted centre. The candidate budget scales with the number of
/// `r`-balls that fit, so uncovered pockets become vanishingly rare.
pub fn greedy_packing(region: &Region, r: f64, seed: u64) -> Result<Packing> {
    greedy_packing_from(region, r, seed, Vec::new())
}

/// Greedy packing that starts from the given centres (kept as is).
pub fn greedy_packing_from(region: &Region, r: f64, seed: u64, initial: Vec<HPoint>) -> Result<Packing> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("packing radius {r}")));
    }
    let (a, b) = region.radii();
    if let Region::Ball { radius, .. } = region {
        if *radius < r * (1.0 - 1e-12) {
            return Err(Error::RegionTooSmall(r));
        }
    }
    let d = region.dim();
    let mut centers: Vec<HPoint> = Vec::new();
    let mut index = PointIndex::new(2.0 * r);
    let fits = |c: &HPoint, centers: &Vec<HPoint>, index: &PointIndex| {
        index.candidates(c, 2.0 * r).iter().all(|&i| distance(&centers[i], c) > 2.0 * r)
    };
    for c in initial {
        if fits(&c, &centers, &index) {
            index.insert(&c);
            centers.push(c);
        }
    }
    if b <= a {
        return Ok(Packing { centers, radius: r, region: region.clone() });
    }
    if centers.is_empty() {
        if let Region::Ball { center, .. } = region {
            index.insert(center);
            centers.push(center.clone());
        }
    }
    let vol = region.volume();
    let unit = ball_volume(r, d).max(1e-300);
    let budget = ((PACKING_CANDIDATE_FACTOR * vol / unit).ceil() as usize).clamp(200, 50_000_000);
    let mut rng = rng::stream(seed, rng::tag::PACKING, 0);
    for _ in 0..budget {
        let c = region.sample(&mut rng);
        if fits(&c, &centers, &index) {
            index.insert(&c);
            centers.push(c);
        }
    }
    Ok(Packing { centers, radius: r, region: region.clone() })
}

impl Packing {
    /// Smallest pairwise centre distance (∞ for fewer than two centres).
    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.centers.len() {
            for j in 0..i {
                m = m.min(distance(&self.centers[i], &self.centers[j]));
            }
        }
        m
    }

    /// Fraction of `n` random probes in the `r`-shrunken region farther than
    /// `2r` from every centre.
    pub fn uncovered_fraction(&self, n: usize, seed: u64) -> f64 {
        let probe_region = self.region.shrunk(self.radius);
        if probe_region.volume() <= 0.0 {
            return 0.0;
        }
        let mut index = PointIndex::new(2.0 * self.radius);
        for c in &self.centers {
            index.insert(c);
        }
        let mut rng = rng::stream(seed, rng::tag::PROBE, 0);
        let mut miss = 0;
        for _ in 0..n {
            let x = probe_region.sample(&mut rng);
            let covered = index
                .candidates(&x, 2.0 * self.radius)
                .iter()
                .any(|&i| distance(&self.centers[i], &x) <= 2.0 * self.radius);
            if !covered {
                miss += 1;
            }
        }
        miss as f64 / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_point(d: usize, rmax: f64, rng: &mut Rng) -> HPoint {
        let r = rng.random::<f64>() * rmax;
        HPoint::polar(r, &random_direction(d, rng))
    }

    #[test]
    fn origin_distance_zero_and_unit() {
        let o = HPoint::origin(2);
        assert_eq!(distance(&o, &o), 0.0);
        let x = HPoint::new(vec![1f64.cosh(), 1f64.sinh(), 0.0]).unwrap();
        assert!((distance(&o, &x) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_point_rejected() {
        assert!(HPoint::new(vec![1.0, 0.5, 0.0]).is_err());
        assert!(try_distance(&HPoint { coords: vec![2.0, 0.0, 0.0] }, &HPoint::origin(2)).is_err());
    }

    #[test]
    fn collinear_additivity() {
        let mut rng = rng::stream(1, 0, 0);
        for _ in 0..200 {
            let a = rand_point(3, 5.0, &mut rng);
            let c = rand_point(3, 5.0, &mut rng);
            let s: f64 = rng.random();
            let b = geodesic_point(&a, &c, s);
            let lhs = distance(&a, &c);
            let rhs = distance(&a, &b) + distance(&b, &c);
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} {rhs}");
        }
    }

    #[test]
    fn geodesic_endpoints_and_midpoint() {
        let mut rng = rng::stream(2, 0, 0);
        let x = rand_point(2, 3.0, &mut rng);
        let y = rand_point(2, 3.0, &mut rng);
        assert!(distance(&geodesic_point(&x, &y, 0.0), &x) < 1e-12);
        assert!(distance(&geodesic_point(&x, &y, 1.0), &y) < 1e-9);
        let m = geodesic_point(&x, &y, 0.5);
        let d = distance(&x, &y);
        assert!((distance(&x, &m) - d / 2.0).abs() < 1e-9);
        assert!((distance(&m, &y) - d / 2.0).abs() < 1e-9);
        assert!(try_geodesic_point(&x, &x, 0.5).is_err());
    }

    #[test]
    fn segment_is_unit_speed() {
        let mut rng = rng::stream(3, 0, 0);
        let seg = GeodesicSegment::new(rand_point(3, 4.0, &mut rng), rand_point(3, 4.0, &mut rng));
        for _ in 0..100 {
            let (s, t) = (rng.random::<f64>() * seg.length, rng.random::<f64>() * seg.length);
            let dd = distance(&seg.point_at(s), &seg.point_at(t));
            assert!((dd - (s - t).abs()).abs() < 1e-8);
        }
    }

    #[test]
    fn exp_log_roundtrip() {
        let mut rng = rng::stream(4, 0, 0);
        for _ in 0..100 {
            let x = rand_point(3, 3.0, &mut rng);
            let y = rand_point(3, 3.0, &mut rng);
            let v = log_map(&x, &y);
            assert!(minkowski(&x.coords, &v).abs() < 1e-8 * x.x0().powi(2));
            assert!(distance(&exp_map(&x, &v), &y) < 1e-8);
        }
    }

    #[test]
    fn frame_vectors_are_orthonormal_tangents() {
        let mut rng = rng::stream(5, 0, 0);
        let x = rand_point(3, 6.0, &mut rng);
        for i in 0..3 {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            let v = tangent_from_frame(&x, &e);
            assert!(minkowski(&x.coords, &v).abs() < 1e-9 * x.x0());
            assert!((minkowski(&v, &v) - 1.0).abs() < 1e-9 * x.x0());
        }
    }

    #[test]
    fn ball_volume_closed_forms() {
        use std::f64::consts::PI;
        assert!((ball_volume(1.0, 2) - 2.0 * PI * (1f64.cosh() - 1.0)).abs() < 1e-9);
        assert!((ball_volume(1.0, 2) - 3.41228).abs() < 1e-5);
        assert!((ball_volume(1.0, 3) - PI * (2f64.sinh() - 2.0)).abs() < 1e-9);
        assert!((ball_volume(1.0, 3) - 5.11093).abs() < 1e-5);
        for d in 2..6 {
            let omega = sphere_area(d) / d as f64;
            let ratio = ball_volume(1e-3, d) / (omega * 1e-3f64.powi(d as i32));
            assert!((ratio - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn packing_degenerate_cases() {
        let q = Region::ball_at_origin(2, 0.7);
        let p = greedy_packing(&q, 0.7, 1).unwrap();
        assert_eq!(p.centers.len(), 1);
        let ann = Region::Annulus { center: HPoint::origin(2), inner: 2.0, outer: 2.0 };
        assert!(greedy_packing(&ann, 0.3, 1).unwrap().centers.is_empty());
        assert!(greedy_packing(&Region::ball_at_origin(2, 0.1), 0.5, 1).is_err());
    }
}
