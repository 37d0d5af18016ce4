//! Feynman-Kac estimates of u(t,o): quenched, annealed and the Gaussian-moment oracle.
use std::sync::Arc;

use hyperbolic_pam::fkmc::{fk_annealed, fk_quenched, gaussian_moment_estimate};
use hyperbolic_pam::gaussfield::{make_spec, BumpShape};

fn main() -> hyperbolic_pam::Result<()> {
    let spec = Arc::new(make_spec(0.25, 1.0, BumpShape::default(), 2)?);
    let (t, dt) = (1.0, 0.01);
    let (q, field) = fk_quenched(&spec, t, dt, 300, 1, 20_000)?;
    println!("quenched u(t,o) = {:.5} ± {:.5} ({} field sites)", q.mean, q.se, field.field.len());
    let a = fk_annealed(&spec, t, dt, 300, 2)?;
    println!("annealed E u(t,o) = {:.5} ± {:.5}", a.mean, a.se);
    let g = gaussian_moment_estimate(&spec, t, dt, 300, 3)?;
    println!("Gaussian moment    = {:.5} ± {:.5}", g.mean, g.se);
    Ok(())
}
