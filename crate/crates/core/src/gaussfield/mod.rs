//! Stationary Gaussian field on `H^d` with compactly supported covariance.
//!
//! Covariances are bump autocorrelations ([`kernel`]); fields are sampled
//! exactly on finite site sets and extended lazily by conditional simulation
//! ([`sample`]). [`extremes`] collects max/tail statistics and [`islands`]
//! the excursion-set geometry (islands and η-clusters).

pub mod extremes;
pub mod islands;
pub mod kernel;
pub mod sample;

pub use extremes::{
    borell_check, estimate_tail_constant, exceedance_is, gradient_growth, max_scan, BorellRow, GrowthFit,
    IsEstimate, MaxScanRow, TailFit,
};
pub use islands::{
    build_clusters, cluster_property_frequency, detect_islands, Cluster, ClusterPropertyConfig, ClusterSet,
    IslandSet,
};
pub use kernel::{make_spec, BumpShape, CovarianceSpec};
pub use sample::{
    covariance_matrix, extend_field, sample_field, tilted_sample, FieldRealization, FieldSampler, LazyField,
};

use crate::error::{Error, Result};

/// `(L_δ, η_δ)`: `L_δ = 1.01·2(d-1)K₀/(Ĉ δ²)`,
/// `η_δ = 0.99·min{1/(4L_δ²), Ĉ²δ⁴/(36(d-1)²)}`.
///
/// `c_hat` is the Borell-tail constant of the field on a correlation ball
/// (see [`estimate_tail_constant`]).
pub fn cluster_constants(delta: f64, d: usize, k0: f64, c_hat: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && k0 > 0.0 && c_hat > 0.0) || d < 2 {
        return Err(Error::InvalidParameter(format!(
            "cluster_constants(delta={delta}, d={d}, K0={k0}, C={c_hat})"
        )));
    }
    let dm1 = d as f64 - 1.0;
    let l = 1.01 * 2.0 * dm1 * k0 / (c_hat * delta * delta);
    let eta = 0.99 * (1.0 / (4.0 * l * l)).min(c_hat * c_hat * delta.powi(4) / (36.0 * dm1 * dm1));
    Ok((l, eta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let (l, eta) = cluster_constants(1.0, 2, 1.0, 1.0).unwrap();
        assert!((l - 2.02).abs() < 1e-12);
        assert!((eta - 0.99 / 36.0).abs() < 1e-12);
        assert!((eta - 0.0275).abs() < 1e-12);
        let (l2, _) = cluster_constants(0.5, 2, 1.0, 1.0).unwrap();
        assert!((l2 / l - 4.0).abs() < 1e-12);
        assert!(cluster_constants(0.0, 2, 1.0, 1.0).is_err());
    }
}
