//! Points, distances, geodesics, ball volumes and a greedy packing in H^2.
use hyperbolic_pam::hypgeo::{ball_volume, distance, geodesic_point, greedy_packing, HPoint, Region};

fn main() -> hyperbolic_pam::Result<()> {
    let x = HPoint::polar(2.0, &[1.0, 0.0]);
    let y = HPoint::polar(3.0, &[0.0, 1.0]);
    println!("d(x,y) = {:.6}", distance(&x, &y));
    let mid = geodesic_point(&x, &y, 0.5);
    println!("midpoint radius {:.6}, d(x,mid) = {:.6}", mid.radius(), distance(&x, &mid));
    for r in [1.0, 5.0, 10.0] {
        println!("vol B({r}) in H^2 = {:.6e}, in H^3 = {:.6e}", ball_volume(r, 2), ball_volume(r, 3));
    }
    let p = greedy_packing(&Region::ball_at_origin(2, 3.0), 0.25, 1)?;
    println!(
        "packing of Q_3 by 0.25-balls: {} centres, min separation {:.4}, uncovered fraction {}",
        p.centers.len(),
        p.min_separation(),
        p.uncovered_fraction(5000, 2)
    );
    Ok(())
}
