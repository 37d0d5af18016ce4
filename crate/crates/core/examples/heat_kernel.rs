//! Exact heat kernels in H^2 and H^3 against the comparison function.
use hyperbolic_pam::heatkernel::{calibrate, comparison_fn, exact_kernel, CalibrationGrid};

fn main() -> hyperbolic_pam::Result<()> {
    for d in [2, 3] {
        for (t, rho) in [(0.5, 0.0), (1.0, 2.0), (5.0, 10.0)] {
            let p = exact_kernel(d, t, rho)?;
            println!("d={d} t={t} rho={rho}: p = {p:.6e}, p/q = {:.4}", p / comparison_fn(t, rho, d));
        }
        let cal = calibrate(d, &CalibrationGrid::default(), 100.0)?;
        println!("d={d}: C1 = {:.4}, C2 = {:.4}", cal.c1, cal.c2);
    }
    Ok(())
}
