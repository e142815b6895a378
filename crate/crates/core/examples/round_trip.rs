//! Synthesis and analysis on the torus and the sphere: round trip, Parseval
//! and the exact product rule for spherical harmonics.

use std::sync::Arc;

use num_complex::Complex64;
use surface_nls::experiments::smooth_random_data;
use surface_nls::spectra::{ManifoldKind, ModeLabel, SpectralBasis, SpectralCoeffs};
use surface_nls::transform::{pointwise_product, Factor, SpectralTransform};

fn main() -> surface_nls::Result<()> {
    for (kind, cutoff, scale) in [(ManifoldKind::Torus, 31.0, 1.0), (ManifoldKind::Sphere, 49.0, 2.0)] {
        let basis = SpectralBasis::new(kind, cutoff / scale, scale)?;
        let tr = SpectralTransform::for_basis(Arc::clone(&basis))?;
        let c = smooth_random_data(&basis, 1.0, 1.0, 1)?;
        let f = tr.synthesize(&c)?;
        let back = tr.analyze(&f)?;
        println!(
            "{:<6} {} modes on {}: round trip {:.2e}, |f|^2 integral - mass {:.2e}",
            kind.name(),
            basis.len(),
            tr.grid(),
            back.l2_distance(&c)?,
            f.integrate_abs_pow(2.0) - c.mass()
        );
    }

    // Y_3^1 Y_2^0 only reaches degrees 1, 3 and 5.
    let src = SpectralBasis::new(ManifoldKind::Sphere, 3.5, 1.0)?;
    let target = SpectralBasis::new(ManifoldKind::Sphere, 8.0, 1.0)?;
    let one = Complex64::new(1.0, 0.0);
    let a = SpectralCoeffs::single_mode(Arc::clone(&src), ModeLabel::Harmonic { l: 3, m: 1 }, one)?;
    let b = SpectralCoeffs::single_mode(Arc::clone(&src), ModeLabel::Harmonic { l: 2, m: 0 }, one)?;
    let p = pointwise_product(&[Factor::Plain(&a), Factor::Plain(&b)], &target)?;
    for (m, v) in target.modes().iter().zip(p.values()) {
        if v.norm() > 1e-14 {
            println!("  {:?}: {:+.12}", m.label, v.re);
        }
    }
    Ok(())
}
