//! Exit probabilities of large balls and their Gaussian dependence on R^2/t.
use hyperbolic_pam::hypbm::{exit_stats, ExitMode};
use hyperbolic_pam::stats::linear_fit;

fn main() -> hyperbolic_pam::Result<()> {
    let rows = exit_stats(2, &[8.0, 10.0, 12.0], 2.0, 0.01, 1000, ExitMode::Tilted, 5)?;
    for r in &rows {
        println!("R={} P(tau_R <= t) = {:.4e}  [{:.3e}, {:.3e}]", r.r, r.p_hat, r.ci_lo, r.ci_hi);
    }
    let x: Vec<f64> = rows.iter().map(|r| r.r * r.r / r.t).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.p_hat.ln()).collect();
    let fit = linear_fit(&x, &y);
    println!("log P vs R^2/t: slope {:.4}, R^2 {:.4}", fit.slope, fit.r2);
    Ok(())
}
