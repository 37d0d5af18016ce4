//! The optimal-scenario estimator: paths that travel to a peak and stay there.
use hyperbolic_pam::fkmc::{fk_estimate, fk_localized_lower, LocalizedSpec, PlantedPeak};
use hyperbolic_pam::hypgeo::HPoint;

fn main() -> hyperbolic_pam::Result<()> {
    let center = HPoint::polar(1.0, &[1.0, 0.0]);
    let mut pot = PlantedPeak { center: center.clone(), height: 3.0, radius: 1.0 };
    let full = fk_estimate(&mut pot, 2, 1.0, 0.01, 1000, 1)?;
    println!("unrestricted: {:.5} ± {:.5}", full.mean, full.se);
    for eps in [0.1, 0.2, 0.4] {
        let spec = LocalizedSpec { eps, tube: 1.0, peak_center: center.clone(), peak_radius: 1.0 };
        let loc = fk_localized_lower(&mut pot, 2, 1.0, 0.01, 1000, 1, &spec)?;
        println!("eps={eps}: localized {:.5} ± {:.5} ({} paths accepted)", loc.mean, loc.se, loc.n_accepted);
    }
    Ok(())
}
