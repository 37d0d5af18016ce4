//! Routes of Brownian paths over clusters, their reduction and the staying time.
use std::sync::Arc;

use hyperbolic_pam::fkmc::{fk_path, reduce_word, staying_excursion_split};
use hyperbolic_pam::gaussfield::{build_clusters, detect_islands, make_spec, BumpShape, LazyField};

fn main() -> hyperbolic_pam::Result<()> {
    let w: Vec<char> = "abcabbacbccb".chars().collect();
    println!("reduce(abcabbacbccb) = {}", reduce_word(&w)?.into_iter().collect::<String>());

    let spec = Arc::new(make_spec(1.0, 1.0, BumpShape::default(), 2)?);
    let (t, lambda, delta) = (2.0, 0.2, 0.8);
    let mut field = LazyField::new(spec.clone(), 0.125, 3, 20_000);
    let paths: Vec<_> = (0..5).map(|i| fk_path(2, t, 0.01, 4, i)).collect::<Result<_, _>>()?;
    for p in &paths {
        for x in &p.points {
            field.value_at(x)?;
        }
    }
    let islands = detect_islands(&field.field, delta, t, field.snap)?;
    let clusters = build_clusters(&islands, &field.field.sites, lambda, t)?;
    println!("{} clusters along the sampled paths", clusters.len());
    for (i, p) in paths.iter().enumerate() {
        let s = staying_excursion_split(p, &clusters, &mut field, lambda, delta, 1.6, t)?;
        println!(
            "path {i}: route [{}], staying {:.2}, excursion {:.2}, int xi = {:.3}",
            s.route.word_string(),
            s.staying_time,
            s.excursion_time,
            s.xi_integral
        );
    }
    Ok(())
}
