//! Tail integrals of routes with many clusters and the sign of their exponent.
use hyperbolic_pam::fkmc::long_route_tail;
use hyperbolic_pam::varopt::{n_eta, ModelParams};

fn main() -> hyperbolic_pam::Result<()> {
    let p = ModelParams::new(2, 1.0)?;
    let (eta, k0) = (0.3, 16.0);
    println!("N_eta = {:.2}", n_eta(eta, p.mu0(), k0));
    for n in [1, 2, 4, 8, 64, 128] {
        let r = long_route_tail(eta, n, 20.0, &p, k0)?;
        let how = if r.split { "split bound" } else { "recursion" };
        println!("N={n}: log F = {:.4} ({how}; closed form {:.4}), exponent coefficient {:.3}", r.log_f, r.log_f_closed, r.exponent_coef);
    }
    Ok(())
}
