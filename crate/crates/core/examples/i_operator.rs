//! The I-multiplier, the norms it relates and the scaling plan that goes
//! with each cutoff N.

use surface_nls::experiments::smooth_random_data;
use surface_nls::imethod::{apply_i, homogeneous_scaling_pair, scaling_plan, IMultiplier};
use surface_nls::spectra::{sobolev_norm, ManifoldKind, SpectralBasis};

fn main() -> surface_nls::Result<()> {
    let s = 0.7;
    let mult = IMultiplier::new(8.0, s)?;
    for k in [0.0, 8.0, 10.0, 12.0, 16.0, 32.0, 64.0] {
        println!("m({k:>4}) = {:.6}", mult.value(k));
    }

    let basis = SpectralBasis::new(ManifoldKind::Sphere, 40.0, 1.0)?;
    let u = smooth_random_data(&basis, 2.0, 1.0, 5)?;
    let iu = apply_i(&u, &mult);
    for s0 in [0.0, s] {
        println!(
            "s0={s0}: |u|_(H^s0) = {:.5}  |Iu|_(H^(s0+1-s)) = {:.5}  N^(1-s)|u|_(H^s0) = {:.5}",
            sobolev_norm(&u, s0),
            sobolev_norm(&iu, s0 + 1.0 - s),
            8f64.powf(1.0 - s) * sobolev_norm(&u, s0)
        );
    }
    let (a, b) = homogeneous_scaling_pair(&u, 2.0, s)?;
    println!("homogeneous norm after dilation by 2: {a:.10} vs {b:.10}");

    for n in [4.0, 16.0, 64.0, 256.0] {
        let p = scaling_plan(n, s, 0.5)?;
        println!(
            "N={n:<5} lambda={:.3} steps={} horizon T={:.3} growth exponent {:.3}",
            p.lambda, p.iterations, p.t_final, p.growth_exponent
        );
    }
    Ok(())
}
