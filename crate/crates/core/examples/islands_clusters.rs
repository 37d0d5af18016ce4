//! Super-level islands of a sampled field and their merging into clusters.
use std::sync::Arc;

use hyperbolic_pam::gaussfield::{build_clusters, cluster_constants, detect_islands, extremes, make_spec, sample_field, BumpShape};

fn main() -> hyperbolic_pam::Result<()> {
    let spec = Arc::new(make_spec(1.0, 1.0, BumpShape::default(), 2)?);
    let sites = extremes::scan_sites(2, 3.0, 0.25, 1, 20_000)?;
    let field = sample_field(&spec, &sites, 2)?;
    let islands = detect_islands(&field, 1.5, 1.0, 0.25)?;
    let clusters = build_clusters(&islands, &field.sites, 0.5, 1.0)?;
    println!("{} sites, {} islands above {:.2}, {} clusters", field.len(), islands.len(), islands.threshold, clusters.len());
    println!("{}", serde_json::to_string_pretty(&clusters.report_json())?);
    let (l, eta) = cluster_constants(1.0, 2, 1.0, 1.0)?;
    println!("L_delta = {l}, eta_delta = {eta:.4}");
    Ok(())
}
