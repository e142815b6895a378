//! Fast consistency checks run by the `selftest` subcommand.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::experiments::smooth_random_data;
use crate::locality::an_identity_check;
use crate::record::Check;
use crate::solver::{evolve, EvolveConfig, Scheme};
use crate::spectra::{ManifoldKind, ModeLabel, SpectralBasis, SpectralCoeffs};
use crate::tensorizer::{real_symbol, tensorize, SymbolBlock, TensorizeOptions};
use crate::transform::SpectralTransform;

fn round_trip(manifold: ManifoldKind) -> Result<f64> {
    let b = SpectralBasis::new(manifold, 8.0, 1.0)?;
    let c = smooth_random_data(&b, 0.0, 1.0, 1)?;
    let t = SpectralTransform::for_basis(Arc::clone(&b))?;
    t.analyze(&t.synthesize(&c)?)?.l2_distance(&c)
}

fn single_mode() -> Result<f64> {
    let b = SpectralBasis::new(ManifoldKind::Torus, 3.0, 1.0)?;
    let xi = ModeLabel::Lattice(2, 1);
    let a = Complex64::new(0.6, -0.2) * 2.0 * PI;
    let c0 = SpectralCoeffs::single_mode(b, xi, a)?;
    let t = 0.3;
    let traj = evolve(&c0, &EvolveConfig::new(0.01, t, Scheme::SplitStepStrang))?;
    let amp2 = (a / (2.0 * PI)).norm_sqr();
    let exact = a * Complex64::from_polar(1.0, -(5.0 + amp2) * t);
    Ok((traj.final_state().get(xi).unwrap_or_default() - exact).norm())
}

fn tensor_constant() -> Result<f64> {
    let block = SymbolBlock::dyadic(&[4.0, 8.0], real_symbol(|_: &[f64]| 1.0))?;
    let e = tensorize(&block, &TensorizeOptions::default())?;
    Ok(e.coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| if i == e.coefficients.len() / 2 { (c - 1.0).norm() } else { c.norm() })
        .fold(0.0, f64::max))
}

fn check(name: &str, value: Result<f64>, tol: f64) -> Check {
    match value {
        Ok(v) => Check::new(name, v <= tol, format!("{v:.3e} (tolerance {tol:.0e})")),
        Err(e) => Check::new(name, false, e.to_string()),
    }
}

pub fn selftest() -> Vec<Check> {
    vec![
        check("torus-round-trip", round_trip(ManifoldKind::Torus), 1e-12),
        check("sphere-round-trip", round_trip(ManifoldKind::Sphere), 1e-12),
        check("single-mode-evolution", single_mode(), 1e-11),
        check(
            "a1-identity",
            an_identity_check([-3, 1], [1, 2], [0, -2], [2, -1], 2, 1.0).map(|r| r.max_relative_error()),
            1e-10,
        ),
        check("constant-tensorization", tensor_constant(), 1e-12),
    ]
}
