//! Excursion-set islands and η-clusters.

use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::gaussfield::extremes::scan_sites;
use crate::gaussfield::kernel::CovarianceSpec;
use crate::gaussfield::sample::{FieldRealization, FieldSampler};
use crate::hypgeo::{distance, HPoint, PointIndex};
use crate::rng::{self, child_seed};
use crate::stats::UnionFind;

/// Connected components of the super-level set `{ξ > δt^{2/3}}` on a site set.
///
/// Sites are linked when within `2h` (a discrete stand-in for topological
/// connectivity at lattice spacing `h`).
#[derive(Debug, Clone, Serialize)]
pub struct IslandSet {
    pub threshold: f64,
    pub link_radius: f64,
    /// Site indices, each island sorted, islands ordered by smallest member.
    pub islands: Vec<Vec<usize>>,
}

impl IslandSet {
    pub fn len(&self) -> usize {
        self.islands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.islands.is_empty()
    }

    /// Components of the `link_radius` graph on `sites[i]` for `i` in `members`.
    pub fn from_members(sites: &[HPoint], members: &[usize], link_radius: f64, threshold: f64) -> Self {
        let mut index = PointIndex::new(link_radius);
        for &i in members {
            index.insert(&sites[i]);
        }
        let mut uf = UnionFind::new(members.len());
        for (a, &i) in members.iter().enumerate() {
            for b in index.candidates(&sites[i], link_radius) {
                if b < a && distance(&sites[i], &sites[members[b]]) <= link_radius {
                    uf.union(a, b);
                }
            }
        }
        let mut islands: Vec<Vec<usize>> = uf
            .groups()
            .into_iter()
            .map(|g| {
                let mut v: Vec<usize> = g.into_iter().map(|a| members[a]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        islands.sort_by_key(|g| g[0]);
        Self { threshold, link_radius, islands }
    }
}

/// Islands of `field` at level `δt^{2/3}` with link radius `2h`.
pub fn detect_islands(field: &FieldRealization, delta: f64, t: f64, h: f64) -> Result<IslandSet> {
    if !(delta > 0.0 && t > 0.0 && h > 0.0) {
        return Err(Error::InvalidParameter(format!("detect_islands(delta={delta}, t={t}, h={h})")));
    }
    let threshold = delta * t.powf(2.0 / 3.0);
    let members: Vec<usize> = (0..field.len()).filter(|&i| field.values[i] > threshold).collect();
    Ok(IslandSet::from_members(&field.sites, &members, 2.0 * h, threshold))
}

#[derive(Debug, Clone, Serialize)]
pub struct Cluster {
    pub id: usize,
    /// Indices into the island list.
    pub islands: Vec<usize>,
    /// Site indices (sorted).
    pub sites: Vec<usize>,
    #[serde(skip)]
    pub points: Vec<HPoint>,
    /// Member minimising the largest distance to the other members.
    pub center: HPoint,
    pub diameter: f64,
}

/// η-clusters with a point index for location queries.
#[derive(Debug, Clone)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    /// Islands at distance `≤ merge_radius` are merged.
    pub merge_radius: f64,
    /// A point is "in" a cluster when within this distance of one of its points.
    pub site_radius: f64,
    index: PointIndex,
    owner: Vec<(usize, usize)>,
}

fn one_center(points: &[HPoint]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    let mut diam: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        let ecc = points.iter().map(|q| distance(p, q)).fold(0.0, f64::max);
        diam = diam.max(ecc);
        if ecc < best.1 {
            best = (i, ecc);
        }
    }
    (best.0, diam)
}

impl ClusterSet {
    fn assemble(groups: Vec<(Vec<usize>, Vec<usize>, Vec<HPoint>)>, merge_radius: f64, site_radius: f64) -> Self {
        let mut index = PointIndex::new(site_radius.max(1e-3));
        let mut owner = Vec::new();
        let mut clusters = Vec::with_capacity(groups.len());
        for (id, (islands, sites, points)) in groups.into_iter().enumerate() {
            let (c, diameter) = one_center(&points);
            for (k, p) in points.iter().enumerate() {
                index.insert(p);
                owner.push((id, k));
            }
            clusters.push(Cluster { id, islands, sites, center: points[c].clone(), points, diameter });
        }
        Self { clusters, merge_radius, site_radius, index, owner }
    }

    /// One cluster per point set (single island each).
    pub fn from_point_sets(sets: Vec<Vec<HPoint>>, site_radius: f64) -> Result<Self> {
        if sets.iter().any(|s| s.is_empty()) {
            return Err(Error::EmptyInput("empty cluster point set".into()));
        }
        let groups = sets.into_iter().enumerate().map(|(i, pts)| (vec![i], Vec::new(), pts)).collect();
        Ok(Self::assemble(groups, 0.0, site_radius))
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Cluster with a point nearest to `x` among those within `site_radius`.
    pub fn locate(&self, x: &HPoint) -> Option<usize> {
        self.index
            .candidates(x, self.site_radius)
            .into_iter()
            .map(|k| {
                let (c, i) = self.owner[k];
                (c, distance(&self.clusters[c].points[i], x))
            })
            .filter(|&(_, d)| d <= self.site_radius)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c)
    }

    /// `min` distance from `x` to the points of cluster `c`.
    pub fn distance_to(&self, c: usize, x: &HPoint) -> f64 {
        self.clusters[c].points.iter().map(|p| distance(p, x)).fold(f64::INFINITY, f64::min)
    }

    /// Whether `x` is within `rho` of cluster `c`.
    pub fn within(&self, c: usize, x: &HPoint, rho: f64) -> bool {
        self.index.candidates(x, rho).into_iter().any(|k| {
            let (ck, i) = self.owner[k];
            ck == c && distance(&self.clusters[c].points[i], x) <= rho
        })
    }

    /// `{clusters:[{id, center, diameter, n_islands, n_sites}]}`.
    pub fn report_json(&self) -> serde_json::Value {
        let cl: Vec<_> = self
            .clusters
            .iter()
            .map(|c| {
                json!({
                    "id": c.id,
                    "center": c.center.coords,
                    "diameter": c.diameter,
                    "n_islands": c.islands.len(),
                    "n_sites": c.points.len(),
                })
            })
            .collect();
        json!({ "clusters": cl })
    }
}

/// Merge islands at set distance `≤ ηt^{4/3}` into clusters.
pub fn build_clusters(islands: &IslandSet, sites: &[HPoint], eta: f64, t: f64) -> Result<ClusterSet> {
    if !(eta > 0.0 && t > 0.0) {
        return Err(Error::InvalidParameter(format!("build_clusters(eta={eta}, t={t})")));
    }
    let merge = eta * t.powf(4.0 / 3.0);
    let mut index = PointIndex::new(merge);
    let mut island_of = Vec::new();
    let mut flat = Vec::new();
    for (k, isl) in islands.islands.iter().enumerate() {
        for &i in isl {
            index.insert(&sites[i]);
            island_of.push(k);
            flat.push(i);
        }
    }
    let mut uf = UnionFind::new(islands.len());
    for (a, &i) in flat.iter().enumerate() {
        for b in index.candidates(&sites[i], merge) {
            if island_of[a] != island_of[b] && distance(&sites[i], &sites[flat[b]]) <= merge {
                uf.union(island_of[a], island_of[b]);
            }
        }
    }
    let groups = uf
        .groups()
        .into_iter()
        .map(|g| {
            let mut s: Vec<usize> = g.iter().flat_map(|&k| islands.islands[k].iter().copied()).collect();
            s.sort_unstable();
            let pts = s.iter().map(|&i| sites[i].clone()).collect();
            (g, s, pts)
        })
        .collect();
    Ok(ClusterSet::assemble(groups, merge, islands.link_radius))
}

/// Desk-scale setup for the "no crowded ball" statistic.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterPropertyConfig {
    pub delta: f64,
    pub eta: f64,
    /// Point count that makes a ball crowded.
    pub l_delta: f64,
    /// Required pairwise separation of counted points.
    pub min_sep: f64,
    /// Radius of the simulated region `Q_R`.
    pub region_radius: f64,
    pub spacing: f64,
    pub t_grid: Vec<f64>,
    pub n_reps: usize,
    pub seed: u64,
    pub site_cap: usize,
}

impl ClusterPropertyConfig {
    pub fn new(spec: &CovarianceSpec, delta: f64, eta: f64, l_delta: f64) -> Self {
        Self {
            delta,
            eta,
            l_delta,
            min_sep: 9.0 * spec.r0,
            region_radius: 3.0,
            spacing: 0.25 * spec.r0,
            t_grid: vec![1.0, 2.0, 4.0],
            n_reps: 50,
            seed: 1,
            site_cap: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClusterPropertyRow {
    pub t: f64,
    pub threshold: f64,
    pub ball_radius: f64,
    pub frequency: f64,
    pub n_reps: usize,
}

/// Greedy count of points pairwise `≥ sep` apart.
fn separated_count(points: &[&HPoint], sep: f64) -> usize {
    let mut kept: Vec<&HPoint> = Vec::new();
    for p in points {
        if kept.iter().all(|q| distance(p, q) >= sep) {
            kept.push(p);
        }
    }
    kept.len()
}

/// Fraction of fields in which some `√η t^{4/3}`-ball centred at a point of
/// `I_δ^t` holds `≥ L` super-level points pairwise `≥ min_sep` apart.
pub fn cluster_property_frequency(spec: &Arc<CovarianceSpec>, cfg: &ClusterPropertyConfig) -> Result<Vec<ClusterPropertyRow>> {
    if cfg.n_reps == 0 || !(cfg.eta > 0.0 && cfg.delta > 0.0 && cfg.min_sep > 0.0) {
        return Err(Error::InvalidParameter("cluster property config".into()));
    }
    let sites = scan_sites(spec.d, cfg.region_radius, cfg.spacing, child_seed(cfg.seed, rng::tag::PACKING, 0), cfg.site_cap)?;
    let sampler = FieldSampler::new(spec.clone(), sites)?;
    let mut hits = vec![0usize; cfg.t_grid.len()];
    for rep in 0..cfg.n_reps {
        let field = sampler.sample(child_seed(cfg.seed, rng::tag::FIELD, rep as u64));
        for (k, &t) in cfg.t_grid.iter().enumerate() {
            let thr = cfg.delta * t.powf(2.0 / 3.0);
            let radius = cfg.eta.sqrt() * t.powf(4.0 / 3.0);
            let up: Vec<&HPoint> =
                field.sites.iter().zip(&field.values).filter(|(_, &v)| v > thr).map(|(s, _)| s).collect();
            let crowded = up.iter().any(|c| {
                let inside: Vec<&HPoint> = up.iter().copied().filter(|p| distance(c, p) <= radius).collect();
                separated_count(&inside, cfg.min_sep) as f64 >= cfg.l_delta
            });
            if crowded {
                hits[k] += 1;
            }
        }
    }
    Ok(cfg
        .t_grid
        .iter()
        .zip(hits)
        .map(|(&t, h)| ClusterPropertyRow {
            t,
            threshold: cfg.delta * t.powf(2.0 / 3.0),
            ball_radius: cfg.eta.sqrt() * t.powf(4.0 / 3.0),
            frequency: h as f64 / cfg.n_reps as f64,
            n_reps: cfg.n_reps,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussfield::kernel::{make_spec, BumpShape};

    fn line(n: usize, step: f64) -> Vec<HPoint> {
        (0..n).map(|i| HPoint::polar(i as f64 * step, &[1.0, 0.0])).collect()
    }

    fn field(values: Vec<f64>, sites: Vec<HPoint>) -> FieldRealization {
        let spec = Arc::new(make_spec(1.0, 1.0, BumpShape::default(), 2).unwrap());
        let mut f = FieldRealization::empty(spec);
        f.sites = sites;
        f.values = values;
        f
    }

    #[test]
    fn trivial_islands() {
        let f = field(vec![0.1, 0.2, 0.3], line(3, 0.25));
        assert!(detect_islands(&f, 1.0, 1.0, 0.25).unwrap().is_empty());
        let f = field(vec![0.1, 2.0, 0.3], line(3, 0.25));
        assert_eq!(detect_islands(&f, 1.0, 1.0, 0.25).unwrap().islands, vec![vec![1]]);
        let f = field(vec![2.0, 2.0, 0.0, 2.0, 2.0, 0.0, 0.0, 2.0], line(8, 0.25));
        assert_eq!(detect_islands(&f, 1.0, 1.0, 0.15).unwrap().islands, vec![vec![0, 1], vec![3, 4], vec![7]]);
        // 2h = 0.5 bridges a one-site gap.
        assert_eq!(detect_islands(&f, 1.0, 1.0, 0.25).unwrap().islands, vec![vec![0, 1, 3, 4], vec![7]]);
    }

    #[test]
    fn separation_and_chains() {
        let t: f64 = 1.0;
        let eta = 0.5;
        let sites = line(2, 2.0 * eta);
        let isl = IslandSet { threshold: 0.0, link_radius: 0.01, islands: vec![vec![0], vec![1]] };
        assert_eq!(build_clusters(&isl, &sites, eta, t).unwrap().len(), 2);
        let sites = line(6, 0.5 * eta);
        let isl = IslandSet { threshold: 0.0, link_radius: 0.01, islands: (0..6).map(|i| vec![i]).collect() };
        let cs = build_clusters(&isl, &sites, eta, t).unwrap();
        assert_eq!(cs.len(), 1);
        assert!((cs.clusters[0].diameter - 1.25).abs() < 1e-9);
        assert_eq!(cs.locate(&sites[3]), Some(0));
        let json = cs.report_json();
        assert_eq!(json["clusters"][0]["n_islands"], 6);
    }
}
