//! Route-budget bounds on synthetic route geometries.
use hyperbolic_pam::fkmc::{random_geometry, route_budget};
use hyperbolic_pam::rng;
use hyperbolic_pam::varopt::{route_constants_checked, ModelParams};

fn main() -> hyperbolic_pam::Result<()> {
    let p = ModelParams::new(2, 1.0)?;
    let (alpha, mu) = (0.1, 1.1 * p.mu0());
    let rc = route_constants_checked(1.36, 0.01, 15.0, 16.0, &p, 1.0, alpha, mu)?;
    println!("N_eta = {:.3}, L_delta = {:.4}, eta_delta = {:.4}, C_Q = {:.4}", rc.n_eta, rc.l_delta, rc.eta_delta, rc.c_q);
    let mut g = rng::stream(1, rng::tag::FUZZ, 0);
    for _ in 0..5 {
        let geo = random_geometry(20.0, &rc, 5, 3, &mut g);
        let b = route_budget(&geo, 20.0, alpha, mu, &p, &rc)?;
        if !b.log_j.is_finite() {
            println!("labels {:?}: J = +inf, bound holds trivially", geo.labels);
            continue;
        }
        println!(
            "labels {:?}: log J = {:.1}, log I = {:.1} <= log bound = {:.1}",
            geo.labels, b.log_j, b.log_staying, b.log_bound
        );
    }
    Ok(())
}
