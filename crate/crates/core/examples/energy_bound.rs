//! Minimum path energy among deviating paths against its lower bound.
use hyperbolic_pam::hypbm::energy_excess_check;

fn main() -> hyperbolic_pam::Result<()> {
    let r = energy_excess_check(1.0, 0.5, 0.02, 0.001, 2, 8, 1)?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(())
}
