//! Maxima of the field over balls: exact scans, Borell check, tail estimates.
use std::sync::Arc;

use hyperbolic_pam::gaussfield::{borell_check, exceedance_is, max_scan, make_spec, BumpShape};

fn main() -> hyperbolic_pam::Result<()> {
    let spec = Arc::new(make_spec(1.0, 1.0, BumpShape::default(), 2)?);
    let rows = max_scan(&spec, &[1.0, 2.0], 0.25, 200, &[1.5, 2.0], 3, 20_000)?;
    for r in &rows {
        println!("R={} sites={} E max|xi| = {:.3} ± {:.3}, exceed {:?}", r.r, r.n_sites, r.mean_max, r.se_max, r.exceed);
    }
    let last = &rows[rows.len() - 1];
    let lambdas: Vec<f64> = (1..=6).map(|k| last.mean_max + 0.5 * k as f64).collect();
    for b in borell_check(&last.maxima, 1.0, &lambdas) {
        println!("  P(max > {:.2}) = {:.4} <= {:.4}: {}", b.lambda, b.p_hat, b.bound, b.holds);
    }
    for r in [5.0, 10.0] {
        let u = (3.0 * r as f64).sqrt();
        let is = exceedance_is(&spec, r, u, 0.25, 500, 4)?;
        println!("R={r}: P(max > {u:.3}) ~ {:.3e} (importance sampling)", is.p_hat);
    }
    Ok(())
}
