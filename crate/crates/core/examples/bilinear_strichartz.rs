//! Bilinear space-time norms of free evolutions: semiclassical ratios over a
//! dyadic sweep and the dilation identity between M and M_lambda.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use surface_nls::spectra::{ManifoldKind, SpectralBasis};
use surface_nls::strichartz::{
    random_localized, required_time_nodes, rescaled_bilinear_pair, strichartz_sweep, SweepConfig, SweepRegime,
};

fn main() -> surface_nls::Result<()> {
    for manifold in [ManifoldKind::Torus, ManifoldKind::Sphere] {
        let cfg = SweepConfig {
            manifold,
            n1_list: vec![4, 8, 16],
            n2: 2,
            lambda: 1.0,
            trials: 4,
            seed: 1,
            regime: SweepRegime::Semiclassical,
            low_frequency_ball: false,
            workers: 1,
        };
        for n1 in &cfg.n1_list {
            let max = strichartz_sweep(&SweepConfig { n1_list: vec![*n1], ..cfg.clone() })?
                .iter()
                .map(|s| s.ratio)
                .fold(0.0, f64::max);
            println!("{:<6} N1={n1:<3} max ratio {max:.4}", manifold.name());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for lambda in [2.0, 4.0] {
        let basis = SpectralBasis::new(ManifoldKind::Torus, 2.0, lambda)?;
        let u = random_localized(&basis, 1.0, 2.0, &mut rng)?;
        let v = random_localized(&basis, 0.5, 1.0, &mut rng)?.scaled(Complex64::new(2.0, 0.0));
        let (lhs, rhs) = rescaled_bilinear_pair(&u, &v, required_time_nodes(1.0, 8.0) + 2)?;
        println!("lambda={lambda}: {lhs:.12} vs {rhs:.12}");
    }
    Ok(())
}
