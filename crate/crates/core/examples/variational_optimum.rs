//! Optimal entering fraction, distance scale and growth exponent.
use hyperbolic_pam::varopt::{l_star_relaxed, optimize_f, ModelParams};

fn main() -> hyperbolic_pam::Result<()> {
    for (d, sigma2) in [(2, 1.0), (3, 1.0), (2, 4.0)] {
        let p = ModelParams::new(d, sigma2)?;
        let sol = optimize_f(&p)?;
        println!(
            "d={d} sigma2={sigma2}: eps*={} K*={:.6} L*={:.6} (numeric gap {:.1e})",
            sol.eps_star, sol.k_star, sol.l_star, sol.grid_gap
        );
        for alpha in [0.5, 0.9, 0.999] {
            println!("  L*(alpha={alpha}, 1.01 mu0) = {:.6}", l_star_relaxed(alpha, 1.01 * p.mu0(), &p)?);
        }
    }
    Ok(())
}
