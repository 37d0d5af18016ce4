//! Extended routes of a path over clusters, word reduction, and the
//! staying/excursion split of the time interval.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fkmc::Potential;
use crate::gaussfield::ClusterSet;
use crate::hypbm::Trajectory;
use crate::hypgeo::{distance, HPoint};

/// Extended route: cluster labels with entrance times `σ_i` and exit times
/// `τ_i` (exit from the `λt^{4/3}/2`-neighbourhood of the entered cluster).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Route {
    pub word: Vec<usize>,
    pub sigma: Vec<f64>,
    /// One exit per letter; the last letter may have none (still inside at `t`).
    pub tau: Vec<f64>,
}

impl Route {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// `σ₁, τ₁, σ₂, τ₂, …`
    pub fn stop_times(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.sigma.len() + self.tau.len());
        for (i, s) in self.sigma.iter().enumerate() {
            v.push(*s);
            if let Some(t) = self.tau.get(i) {
                v.push(*t);
            }
        }
        v
    }

    /// Labels joined by `-` (CSV friendly).
    pub fn word_string(&self) -> String {
        self.word.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("-")
    }
}

/// Route of `traj` over `clusters`, read off the trajectory's time grid.
pub fn route_extract(traj: &Trajectory, clusters: &ClusterSet, lambda: f64, t: f64) -> Route {
    let rad = 0.5 * lambda * t.powf(4.0 / 3.0);
    let mut r = Route::default();
    let mut cur: Option<usize> = None;
    let last = traj.times.len().saturating_sub(1);
    for (k, (s, x)) in traj.times.iter().zip(&traj.points).enumerate() {
        if let Some(c) = cur {
            if clusters.within(c, x, rad) {
                continue;
            }
            r.tau.push(*s);
            cur = None;
        }
        // σ_m < t: an entry at the final grid time does not count.
        if k < last {
            if let Some(c) = clusters.locate(x) {
                r.word.push(c);
                r.sigma.push(*s);
                cur = Some(c);
            }
        }
    }
    r
}

/// Positions `i₁ < i₂ < …` (0-based) kept by the reduction: `i₁` is the last
/// occurrence of `w[0]`, `i₂` the last occurrence of `w[i₁+1]`, and so on.
pub fn reduce_positions<T: PartialEq>(w: &[T]) -> Result<Vec<usize>> {
    if w.is_empty() {
        return Err(Error::EmptyInput("reduce_word of an empty word".into()));
    }
    let mut pos = Vec::new();
    let mut i = 0;
    while i < w.len() {
        let last = w.iter().rposition(|c| *c == w[i]).expect("w[i] occurs");
        pos.push(last);
        i = last + 1;
    }
    Ok(pos)
}

pub fn reduce_word<T: PartialEq + Clone>(w: &[T]) -> Result<Vec<T>> {
    Ok(reduce_positions(w)?.into_iter().map(|i| w[i].clone()).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct StaySplit {
    pub staying_time: f64,
    pub excursion_time: f64,
    /// `t^{-4/3} · max` distance from `o` over the visited clusters.
    pub k_star: f64,
    /// Trapezoid `∫ξ(W_s)ds` along the path.
    pub xi_integral: f64,
    /// `δt^{5/3} + μ√K* t^{2/3} · staying_time`.
    pub bound: f64,
    /// On every grid segment, both endpoint values are below the level of
    /// that segment (`μ√K* t^{2/3}` staying, `δt^{2/3}` excursion). Under
    /// this the bound is guaranteed.
    pub precondition: bool,
    pub route: Route,
}

/// Split `[0,t]` into staying time `∪_{i<m}[σ_i,τ_i] ∪ [σ_m,t]` and excursion time,
/// and compare `∫ξ` with the staying-time bound.
#[allow(clippy::too_many_arguments)]
pub fn staying_excursion_split(
    traj: &Trajectory,
    clusters: &ClusterSet,
    pot: &mut dyn Potential,
    lambda: f64,
    delta: f64,
    mu: f64,
    t: f64,
) -> Result<StaySplit> {
    let route = route_extract(traj, clusters, lambda, t);
    let o = HPoint::origin(traj.points[0].dim());
    let mut seen: Vec<usize> = route.word.clone();
    seen.sort_unstable();
    seen.dedup();
    let far = seen
        .iter()
        .flat_map(|&c| clusters.clusters[c].points.iter().map(|p| distance(p, &o)))
        .fold(0.0, f64::max);
    let k_star = far * t.powf(-4.0 / 3.0);
    let t23 = t.powf(2.0 / 3.0);
    let stay_level = mu * k_star.sqrt() * t23;
    let exc_level = delta * t23;

    // Segment k = [times[k], times[k+1]] is staying when it starts inside some
    // [σ_i, τ_i), i < m, or after σ_m.
    let m = route.len();
    let staying_at = |s: f64| {
        route.sigma.iter().enumerate().any(|(i, &a)| {
            let b = if i + 1 == m { f64::INFINITY } else { route.tau[i] };
            s >= a && s < b
        })
    };
    let vals: Vec<f64> = traj.points.iter().map(|p| pot.value(p)).collect::<Result<_>>()?;
    let (mut staying, mut excursion, mut xi, mut ok) = (0.0, 0.0, 0.0, true);
    for k in 0..traj.len().saturating_sub(1) {
        let h = traj.times[k + 1] - traj.times[k];
        let level = if staying_at(traj.times[k]) {
            staying += h;
            stay_level
        } else {
            excursion += h;
            exc_level
        };
        xi += 0.5 * h * (vals[k] + vals[k + 1]);
        ok &= vals[k] <= level && vals[k + 1] <= level;
    }
    Ok(StaySplit {
        staying_time: staying,
        excursion_time: excursion,
        k_star,
        xi_integral: xi,
        bound: delta * t.powf(5.0 / 3.0) + stay_level * staying,
        precondition: ok,
        route,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_and_trivia() {
        let w: Vec<char> = "abcabbacbccb".chars().collect();
        assert_eq!(reduce_word(&w).unwrap().into_iter().collect::<String>(), "acb");
        assert_eq!(reduce_word(&['a', 'a', 'a']).unwrap(), vec!['a']);
        assert_eq!(reduce_word(&[1, 2, 3]).unwrap(), vec![1, 2, 3]);
        assert!(reduce_word::<u8>(&[]).is_err());
    }
}
