mod common;

use std::sync::Arc;

use num_complex::Complex64;
use surface_nls::spectra::{sobolev_norm, ManifoldKind, ModeLabel, SpectralBasis, SpectralCoeffs};
use surface_nls::strichartz::{bilinear_norm, required_time_nodes, time_nodes_for_tolerance};
use surface_nls::transform::{correlation_integral, pointwise_product, Factor, QuadratureGrid, SpectralTransform};

use common::Lcg;

fn random_field(basis: &Arc<SpectralBasis>, rng: &mut Lcg, band: (f64, f64)) -> SpectralCoeffs {
    let mut c = SpectralCoeffs::zeros(Arc::clone(basis));
    for (m, v) in basis.modes().iter().zip(c.values_mut()) {
        if m.frequency >= band.0 && m.frequency < band.1 {
            *v = rng.complex();
        }
    }
    c
}

#[test]
fn eigenfunctions_match_explicit_formulas() {
    for (kind, cutoff, scale, degree) in [(ManifoldKind::Torus, 5.0, 1.5, 12), (ManifoldKind::Sphere, 4.5, 2.0, 20)] {
        let basis = SpectralBasis::new(kind, cutoff, scale).unwrap();
        let grid = QuadratureGrid::for_degree(kind, scale, degree).unwrap();
        let tr = SpectralTransform::new(Arc::clone(&basis), Arc::clone(&grid)).unwrap();
        let mut worst: f64 = 0.0;
        for m in basis.modes() {
            let c = SpectralCoeffs::single_mode(Arc::clone(&basis), m.label, Complex64::new(1.0, 0.0)).unwrap();
            let field = tr.synthesize(&c).unwrap();
            for (j, v) in field.values().iter().enumerate().step_by(7) {
                let want = common::eigenfunction(kind, m.label, scale, grid.node(j));
                worst = worst.max((v - want).norm());
            }
        }
        assert!(worst < 1e-12, "{kind:?}: max pointwise deviation {worst:e}");
    }
}

#[test]
fn torus_correlations_match_convolution() {
    let mut rng = Lcg::new(7);
    for scale in [1.0, 2.5] {
        let basis = SpectralBasis::new(ManifoldKind::Torus, 6.0 / scale, scale).unwrap();
        for _ in 0..5 {
            let f: Vec<SpectralCoeffs> = (0..4).map(|_| random_field(&basis, &mut rng, (0.0, 10.0))).collect();
            let got = correlation_integral(&[
                Factor::Plain(&f[0]),
                Factor::Conj(&f[1]),
                Factor::Plain(&f[2]),
                Factor::Conj(&f[3]),
            ])
            .unwrap();
            let want = common::torus_correlation(&[(&f[0], false), (&f[1], true), (&f[2], false), (&f[3], true)]);
            assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0), "{got} vs {want}");
            let got3 = correlation_integral(&[Factor::Plain(&f[0]), Factor::Plain(&f[1]), Factor::Plain(&f[2])]).unwrap();
            let want3 = common::torus_correlation(&[(&f[0], false), (&f[1], false), (&f[2], false)]);
            assert!((got3 - want3).norm() <= 1e-12 * want3.norm().max(1.0), "{got3} vs {want3}");
        }
    }
}

#[test]
fn sphere_products_match_gaunt_coefficients() {
    let scale = 1.5;
    let unit = |l: u32| ((l * (l + 1)) as f64).sqrt() / scale + 1e-9;
    let source = SpectralBasis::new(ManifoldKind::Sphere, unit(5), scale).unwrap();
    let target = SpectralBasis::new(ManifoldKind::Sphere, unit(12), scale).unwrap();
    let pairs = [((2, 1), (3, -2)), ((5, 5), (4, 0)), ((1, 0), (1, 0)), ((5, -3), (5, 2))];
    for ((l1, m1), (l2, m2)) in pairs {
        let a = SpectralCoeffs::single_mode(Arc::clone(&source), ModeLabel::Harmonic { l: l1, m: m1 }, Complex64::new(1.0, 0.0)).unwrap();
        let b = SpectralCoeffs::single_mode(Arc::clone(&source), ModeLabel::Harmonic { l: l2, m: m2 }, Complex64::new(1.0, 0.0)).unwrap();
        let prod = pointwise_product(&[Factor::Plain(&a), Factor::Plain(&b)], &target).unwrap();
        for (m, v) in target.modes().iter().zip(prod.values()) {
            let ModeLabel::Harmonic { l, m: mm } = m.label else { unreachable!() };
            let want = common::gaunt(l1 as i64, m1 as i64, l2 as i64, m2 as i64, l as i64, mm as i64) / scale;
            assert!((v - want).norm() < 1e-12, "Y{l1},{m1} Y{l2},{m2} on Y{l},{mm}: {v} vs {want}");
        }
    }
}

#[test]
fn bilinear_norm_matches_resonance_sum() {
    let mut rng = Lcg::new(11);
    for (scale, n1, n2) in [(1.0, 4.0, 2.0), (2.0, 3.0, 1.0), (1.0, 3.0, 3.0)] {
        let basis = SpectralBasis::new(ManifoldKind::Torus, 2.0 * n1, scale).unwrap();
        let u = random_field(&basis, &mut rng, (n1, 2.0 * n1));
        let v = random_field(&basis, &mut rng, (n2, 2.0 * n2));
        let t = 1.0 / n1;
        let omega = basis.max_eigenvalue() * 2.0;
        let want = common::bilinear_closed_form(&u, &v, t);
        let got = bilinear_norm(&u, &v, t, time_nodes_for_tolerance(t, omega, 1e-12)).unwrap();
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
        // the minimal node rule is already within a few parts in 1e5
        let coarse = bilinear_norm(&u, &v, t, required_time_nodes(t, omega)).unwrap();
        assert!((coarse - want).abs() <= 1e-4 * want, "{coarse} vs {want}");
    }
}

#[test]
fn sobolev_norms_match_label_sums() {
    let mut rng = Lcg::new(3);
    for kind in [ManifoldKind::Torus, ManifoldKind::Sphere] {
        let basis = SpectralBasis::new(kind, 9.0, 1.7).unwrap();
        let c = random_field(&basis, &mut rng, (0.0, 100.0));
        for s in [-1.0, 0.0, 0.7, 2.0] {
            let (a, b) = (sobolev_norm(&c, s), common::sobolev(&c, s));
            assert!((a - b).abs() <= 1e-13 * b, "{kind:?} s={s}: {a} vs {b}");
        }
    }
}

#[test]
fn sandwich_lower_bound_holds_mode_by_mode() {
    use surface_nls::imethod::IMultiplier;
    for kind in [ManifoldKind::Torus, ManifoldKind::Sphere] {
        let basis = SpectralBasis::new(kind, 64.0, 1.0).unwrap();
        for n in [2.0, 5.0, 16.0] {
            for s in [0.7, 0.8, 0.95] {
                let mult = IMultiplier::new(n, s).unwrap();
                let mut upper: f64 = 0.0;
                for m in basis.modes() {
                    let nu = common::eigenvalue(m.label, 1.0);
                    let r = mult.value(nu.sqrt()) * (1.0 + nu).powf(0.5 * (1.0 - s));
                    assert!(r >= 1.0 - 1e-15, "{kind:?} N={n} s={s} at nu={nu}: {r}");
                    upper = upper.max(r / n.powf(1.0 - s));
                }
                // the upper bound only holds up to a constant just above 1
                assert!(upper > 1.0 && upper < 1.1, "{kind:?} N={n} s={s}: {upper}");
            }
        }
    }
}
