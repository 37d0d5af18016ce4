//! Brownian paths on H^d and the radial law of large numbers R_t ~ (d-1)t.
use hyperbolic_pam::hypbm::{radial::radial_endpoints, simulate_bm};
use hyperbolic_pam::stats::MeanVar;

fn main() -> hyperbolic_pam::Result<()> {
    let path = simulate_bm(2, 1.0, 0.1, 3)?;
    path.write_csv(std::io::stdout())?;
    for d in [2, 3] {
        for t in [5.0, 20.0] {
            let r = radial_endpoints(d, t, 0.01, 0.0, 300, 4)?;
            let mv = MeanVar::of(&r);
            println!("d={d} t={t}: E R_t/((d-1)t) = {:.4} ± {:.4}", mv.mean / ((d - 1) as f64 * t), mv.se() / ((d - 1) as f64 * t));
        }
    }
    Ok(())
}
