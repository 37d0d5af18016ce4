//! Brownian bridges and the decay of their deviation probability in 1/s.
use hyperbolic_pam::hypbm::{bridge::max_deviation, bridge_ldp_decay, simulate_bridge, BridgeSpec};
use hyperbolic_pam::hypgeo::HPoint;

fn main() -> hyperbolic_pam::Result<()> {
    let x = HPoint::origin(2);
    let y = HPoint::polar(1.0, &[1.0, 0.0]);
    let b = simulate_bridge(&BridgeSpec::new(x.clone(), y.clone(), 0.5)?, 0.01, 1)?;
    println!("one bridge: max deviation from the geodesic {:.4}", max_deviation(&b, &x, &y));
    let fit = bridge_ldp_decay(&x, &y, 0.8, &[0.4, 0.2, 0.1, 0.05], 500, 50, 2)?;
    for r in &fit.rows {
        println!("s={} P(dev > delta/2) = {:.4} ({} of {})", r.s, r.p_hat, r.hits, r.n);
    }
    println!("log P ~ a - kappa/s: kappa = {:.4}, R^2 = {:.4}", fit.kappa, fit.r2);
    Ok(())
}
