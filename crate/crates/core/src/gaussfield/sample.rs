//! Exact and conditional field sampling on finite site sets.

use std::io::Write;
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gaussfield::kernel::CovarianceSpec;
use crate::hypgeo::{distance, HPoint, PointIndex};
use crate::numerics::Cholesky;
use crate::rng::{self, Rng};

/// Jitter cap for factorisations, relative to `σ²`.
pub const JITTER_CAP: f64 = 1e-8;
/// Sites closer than this are treated as duplicates.
const DUPLICATE_TOL: f64 = 1e-9;
/// Conditioning sets keep at most this many nearest sites within `R₀`.
pub const MAX_CONDITION: usize = 96;

/// Dense covariance matrix `C(d(x_i, x_j))`, row-major.
pub fn covariance_matrix(spec: &CovarianceSpec, sites: &[HPoint]) -> Vec<f64> {
    let n = sites.len();
    let mut a = vec![0.0; n * n];
    let mut index = PointIndex::new(spec.r0);
    for s in sites {
        index.insert(s);
    }
    for i in 0..n {
        a[i * n + i] = spec.sigma2;
        for j in index.candidates(&sites[i], spec.r0) {
            if j < i {
                let c = spec.cov(distance(&sites[i], &sites[j]));
                a[i * n + j] = c;
                a[j * n + i] = c;
            }
        }
    }
    a
}

fn check_distinct(sites: &[HPoint]) -> Result<PointIndex> {
    let mut index = PointIndex::new(1e-6);
    for (i, s) in sites.iter().enumerate() {
        if index.candidates(s, DUPLICATE_TOL).iter().any(|&j| distance(&sites[j], s) < DUPLICATE_TOL) {
            return Err(Error::InvalidParameter(format!("duplicate site {i}")));
        }
        index.insert(s);
    }
    Ok(index)
}

/// Field values on a site set.
///
/// Holds a neighbour index over the sites (query radius `R₀`) so that the
/// realization can be extended conditionally.
#[derive(Debug, Clone)]
pub struct FieldRealization {
    pub spec: Arc<CovarianceSpec>,
    pub sites: Vec<HPoint>,
    pub values: Vec<f64>,
    /// Jitter used by the initial factorisation.
    pub jitter: f64,
    index: PointIndex,
}

impl FieldRealization {
    /// Realization with no sites (to be grown by extension).
    pub fn empty(spec: Arc<CovarianceSpec>) -> Self {
        let index = PointIndex::new(spec.r0);
        Self { spec, sites: Vec::new(), values: Vec::new(), jitter: 0.0, index }
    }

    fn from_parts(spec: Arc<CovarianceSpec>, sites: Vec<HPoint>, values: Vec<f64>, jitter: f64) -> Self {
        let mut index = PointIndex::new(spec.r0);
        for s in &sites {
            index.insert(s);
        }
        Self { spec, sites, values, jitter, index }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Indices of sites within distance `rho` of `x`, nearest first.
    pub fn neighbours(&self, x: &HPoint, rho: f64) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = self
            .index
            .candidates(x, rho)
            .into_iter()
            .map(|i| (i, distance(&self.sites[i], x)))
            .filter(|&(_, d)| d < rho)
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    /// Add one site, drawing its value conditionally on the sites within `R₀`.
    pub fn extend_one(&mut self, x: HPoint, rng: &mut Rng) -> Result<f64> {
        let spec = &self.spec;
        let mut nb = self.neighbours(&x, spec.r0);
        if nb.first().is_some_and(|&(_, d)| d < DUPLICATE_TOL) {
            return Err(Error::InvalidParameter("new site coincides with an existing site".into()));
        }
        nb.truncate(MAX_CONDITION);
        let z: f64 = rng.sample(StandardNormal);
        let value = if nb.is_empty() {
            spec.sigma2.sqrt() * z
        } else {
            let n = nb.len();
            let mut a = vec![0.0; n * n];
            for (p, &(i, _)) in nb.iter().enumerate() {
                a[p * n + p] = spec.sigma2;
                for (q, &(j, _)) in nb.iter().enumerate().take(p) {
                    let c = spec.cov(distance(&self.sites[i], &self.sites[j]));
                    a[p * n + q] = c;
                    a[q * n + p] = c;
                }
            }
            let c: Vec<f64> = nb.iter().map(|&(_, d)| spec.cov(d)).collect();
            let chol = Cholesky::factor(&a, n, spec.sigma2, JITTER_CAP * spec.sigma2)?;
            let w = chol.solve(&c);
            let mean: f64 = w.iter().zip(&nb).map(|(wi, &(i, _))| wi * self.values[i]).sum();
            let var = (spec.sigma2 - w.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>()).max(0.0);
            mean + var.sqrt() * z
        };
        self.index.insert(&x);
        self.sites.push(x);
        self.values.push(value);
        Ok(value)
    }

    /// CSV snapshot: `site_id, x0..xd, value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.spec.d;
        let head: Vec<String> = (0..=d).map(|k| format!("x{k}")).collect();
        writeln!(w, "site_id,{},value", head.join(","))?;
        for (i, (s, v)) in self.sites.iter().zip(&self.values).enumerate() {
            let c: Vec<String> = s.coords.iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{i},{},{v:e}", c.join(","))?;
        }
        Ok(())
    }
}

/// Factorised covariance of a fixed site set; draws independent realizations.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    pub spec: Arc<CovarianceSpec>,
    pub sites: Vec<HPoint>,
    chol: Cholesky,
}

impl FieldSampler {
    pub fn new(spec: Arc<CovarianceSpec>, sites: Vec<HPoint>) -> Result<Self> {
        check_distinct(&sites)?;
        let a = covariance_matrix(&spec, &sites);
        let chol = Cholesky::factor(&a, sites.len(), spec.sigma2, JITTER_CAP * spec.sigma2)?;
        Ok(Self { spec, sites, chol })
    }

    pub fn jitter(&self) -> f64 {
        self.chol.jitter
    }

    /// Centred values for the given seed.
    pub fn sample_values(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng::stream(seed, rng::tag::FIELD, 0);
        let z: Vec<f64> = (0..self.sites.len()).map(|_| rng.sample(StandardNormal)).collect();
        self.chol.mul(&z)
    }

    pub fn sample(&self, seed: u64) -> FieldRealization {
        let values = self.sample_values(seed);
        FieldRealization::from_parts(self.spec.clone(), self.sites.clone(), values, self.chol.jitter)
    }
}

/// Exact centred Gaussian draw on `sites`.
pub fn sample_field(spec: &Arc<CovarianceSpec>, sites: &[HPoint], seed: u64) -> Result<FieldRealization> {
    Ok(FieldSampler::new(spec.clone(), sites.to_vec())?.sample(seed))
}

/// Draw with mean `(h/σ²)·C(d(x,o))` and unchanged covariance.
pub fn tilted_sample(spec: &Arc<CovarianceSpec>, sites: &[HPoint], h: f64, seed: u64) -> Result<FieldRealization> {
    if !(h >= 0.0) {
        return Err(Error::InvalidParameter(format!("tilt h = {h}")));
    }
    let mut f = sample_field(spec, sites, seed)?;
    let o = HPoint::origin(spec.d);
    let rho = h / spec.sigma2;
    for (v, s) in f.values.iter_mut().zip(&f.sites) {
        *v += rho * spec.cov(distance(s, &o));
    }
    Ok(f)
}

/// Conditional extension to `new_sites` (drawn in order, each conditioned on
/// all earlier sites within `R₀`).
pub fn extend_field(field: &FieldRealization, new_sites: &[HPoint], seed: u64) -> Result<FieldRealization> {
    check_distinct(new_sites)?;
    let mut out = field.clone();
    for (k, x) in new_sites.iter().enumerate() {
        let mut rng = rng::stream(seed, rng::tag::EXTEND, k as u64);
        out.extend_one(x.clone(), &mut rng)?;
    }
    Ok(out)
}

/// Field evaluated lazily on a snapped net.
///
/// A query within `snap/2` of an existing site returns that site's value;
/// otherwise the query point becomes a new site, drawn conditionally.
#[derive(Debug, Clone)]
pub struct LazyField {
    pub field: FieldRealization,
    pub snap: f64,
    pub seed: u64,
    pub cap: usize,
}

impl LazyField {
    pub fn new(spec: Arc<CovarianceSpec>, snap: f64, seed: u64, cap: usize) -> Self {
        Self { field: FieldRealization::empty(spec), snap, seed, cap }
    }

    pub fn value_at(&mut self, x: &HPoint) -> Result<f64> {
        let half = 0.5 * self.snap;
        if let Some(&(i, _)) = self.field.neighbours(x, half).first() {
            return Ok(self.field.values[i]);
        }
        let n = self.field.len();
        if n >= self.cap {
            return Err(Error::BudgetExceeded { what: "field sites".into(), value: n + 1, cap: self.cap });
        }
        let mut rng = rng::stream(self.seed, rng::tag::EXTEND, n as u64);
        self.field.extend_one(x.clone(), &mut rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussfield::kernel::{make_spec, BumpShape};
    use crate::stats::MeanVar;

    fn spec() -> Arc<CovarianceSpec> {
        Arc::new(make_spec(1.0, 1.0, BumpShape::default(), 2).unwrap())
    }

    fn at(r: f64) -> HPoint {
        HPoint::polar(r, &[1.0, 0.0])
    }

    #[test]
    fn single_site_variance() {
        let s = spec();
        let sampler = FieldSampler::new(s, vec![at(0.3)]).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|k| sampler.sample_values(k)[0]).collect();
        let mv = MeanVar::of(&xs);
        // SE of the sample variance of a Gaussian: σ²·sqrt(2/(n-1)).
        assert!((mv.var - 1.0).abs() < 4.0 * (2.0 / 99_999f64).sqrt());
    }

    #[test]
    fn determinism_and_duplicates() {
        let s = spec();
        let sites = vec![at(0.0), at(0.4), at(2.0)];
        let a = sample_field(&s, &sites, 9).unwrap();
        let b = sample_field(&s, &sites, 9).unwrap();
        assert_eq!(a.values, b.values);
        assert!(sample_field(&s, &[at(0.4), at(0.4)], 1).is_err());
        let e1 = extend_field(&a, &[at(0.7)], 5).unwrap();
        let e2 = extend_field(&a, &[at(0.7)], 5).unwrap();
        assert_eq!(e1.values, e2.values);
        assert!(extend_field(&a, &[at(0.4)], 5).is_err());
    }

    #[test]
    fn isolated_extension_is_unconditional() {
        let s = spec();
        let base = sample_field(&s, &[at(0.0)], 3).unwrap();
        let xs: Vec<f64> = (0..20_000)
            .map(|k| *extend_field(&base, &[at(5.0)], k).unwrap().values.last().unwrap())
            .collect();
        let mv = MeanVar::of(&xs);
        assert!(mv.mean.abs() < 4.0 * mv.se());
        assert!((mv.var - 1.0).abs() < 4.0 * (2.0 / 20_000f64).sqrt());
    }

    #[test]
    fn lazy_field_snaps_and_caps() {
        let s = spec();
        let mut f = LazyField::new(s, 0.2, 1, 2);
        let v = f.value_at(&at(0.0)).unwrap();
        assert_eq!(f.value_at(&at(0.05)).unwrap(), v);
        f.value_at(&at(0.5)).unwrap();
        assert!(matches!(f.value_at(&at(1.0)), Err(Error::BudgetExceeded { .. })));
    }
}
