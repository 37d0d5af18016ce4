//! Random-input checks of the elementary inequalities behind the upper bound.
use hyperbolic_pam::varopt::{fuzz_chain_bound, fuzz_ha_mean, fuzz_hop_inequality, ModelParams};

fn main() -> hyperbolic_pam::Result<()> {
    let p = ModelParams::new(2, 1.0)?;
    for r in [fuzz_chain_bound(10_000, 1), fuzz_hop_inequality(10_000, 2, &p), fuzz_ha_mean(10_000, 3)] {
        println!("{}: {} trials, {} violations", r.name, r.trials, r.violations.len());
    }
    Ok(())
}
