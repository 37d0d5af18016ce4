//! Exact sampling of the compactly correlated field and lazy conditional extension.
use std::sync::Arc;

use hyperbolic_pam::gaussfield::{make_spec, sample_field, BumpShape, LazyField};
use hyperbolic_pam::hypgeo::HPoint;

fn main() -> hyperbolic_pam::Result<()> {
    let spec = Arc::new(make_spec(1.0, 1.0, BumpShape::parse("poly3")?, 2)?);
    for rho in [0.0, 0.25, 0.5, 0.75, 1.0, 1.5] {
        println!("C({rho}) = {:.6}", spec.cov(rho));
    }
    let sites: Vec<HPoint> = (0..10).map(|i| HPoint::polar(0.2 * i as f64, &[1.0, 0.0])).collect();
    let field = sample_field(&spec, &sites, 7)?;
    field.write_csv(std::io::stdout())?;

    let mut lazy = LazyField::new(spec.clone(), spec.r0 / 8.0, 7, 10_000);
    let walk: Vec<f64> = (0..20).map(|i| lazy.value_at(&HPoint::polar(0.05 * i as f64, &[0.0, 1.0]))).collect::<Result<_, _>>()?;
    println!("lazy field along a ray: {walk:.3?} ({} sites realised)", lazy.field.len());
    Ok(())
}
