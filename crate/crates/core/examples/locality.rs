//! Spectral localization of products: cluster decay away from the sum of
//! the input frequencies on the sphere, and exact orthogonality of
//! off-resonant torus quadruples.

use surface_nls::experiments::off_resonant_quadruples;
use surface_nls::locality::cluster_decay_table;

fn main() -> surface_nls::Result<()> {
    let rows = cluster_decay_table(20.0, 5.0, &[0.0, 1.0, 2.0], 2, 11)?;
    for r in &rows {
        println!(
            "trial {} {:?} K={} nu={:>5}: |P(fg)| / (mu^1/2 |f||g|) = {:.3e}",
            r.trial, r.branch, r.k, r.nu, r.ratio
        );
    }
    let quads = off_resonant_quadruples(200, 8.0, 3)?;
    let worst = quads.iter().map(|q| q.value).fold(0.0, f64::max);
    println!("largest off-resonant quadruple correlation over {}: {worst:.1e}", quads.len());
    Ok(())
}
