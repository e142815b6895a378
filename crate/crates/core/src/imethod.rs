//! The smoothing multiplier `I`, conserved and modified functionals, and the
//! dilation bookkeeping used to iterate almost-conservation.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{homogeneous_sobolev_norm, sobolev_norm, SpectralBasis, SpectralCoeffs};
use crate::transform::{QuadratureGrid, SpectralTransform, DEFAULT_GRID_BUDGET};

/// Radial Fourier multiplier `m(k) = m₀(k/N)`: one below `N`, `(N/k)^{1-s}`
/// above `2N`, blended in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IMultiplier {
    pub n_cut: f64,
    pub s: f64,
}

/// Quintic smoothstep; `σ(0)=0`, `σ(1)=1`, first two derivatives vanish at both ends.
fn smoothstep(u: f64) -> f64 {
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

/// `m₀(t)`: `1` for `t ≤ 1`, `t^{-(1-s)}` for `t ≥ 2`, and
/// `t^{-(1-s)σ(log₂ t)}` in between.
pub fn m0(t: f64, s: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        t.powf(s - 1.0)
    } else {
        t.powf((s - 1.0) * smoothstep(t.log2()))
    }
}

impl IMultiplier {
    pub fn new(n_cut: f64, s: f64) -> Result<Self> {
        if !(n_cut.is_finite() && n_cut > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "multiplier cutoff N must be positive, got {n_cut}"
            )));
        }
        if !(s > 0.5 && s <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "regularity s must lie in (1/2, 1], got {s}"
            )));
        }
        Ok(IMultiplier { n_cut, s })
    }

    /// `m(k)` for a frequency `k ≥ 0`.
    pub fn value(&self, k: f64) -> f64 {
        m0(k / self.n_cut, self.s)
    }
}

/// Scales each coefficient by `m(n_k)`.
pub fn apply_i(c: &SpectralCoeffs, mult: &IMultiplier) -> SpectralCoeffs {
    c.map_modes(|m, v| v * mult.value(m.frequency))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub mass: f64,
    /// `½∫|∇Iu|²`.
    pub kinetic: f64,
    /// `¼∫|Iu|⁴`.
    pub potential: f64,
    pub modified_energy: f64,
    /// `‖u‖_{H^s}` for the multiplier's `s` (`H¹` without a multiplier).
    pub h_s_norm: f64,
}

/// Evaluates [`EnergyReport`]s on one basis with a cached quartic grid.
///
/// The quartic grid is exact for `|v|⁴` whenever `v` lives on the basis.
#[derive(Debug)]
pub struct EnergyEvaluator {
    mult: Option<IMultiplier>,
    transform: SpectralTransform,
}

impl EnergyEvaluator {
    pub fn new(basis: Arc<SpectralBasis>, mult: Option<IMultiplier>) -> Result<Self> {
        Self::with_budget(basis, mult, DEFAULT_GRID_BUDGET)
    }

    pub fn with_budget(
        basis: Arc<SpectralBasis>,
        mult: Option<IMultiplier>,
        budget: usize,
    ) -> Result<Self> {
        let grid = QuadratureGrid::for_degree_with_budget(
            basis.manifold(),
            basis.scale(),
            4 * basis.bandwidth(),
            budget,
        )?;
        Ok(EnergyEvaluator {
            mult,
            transform: SpectralTransform::new(basis, grid)?,
        })
    }

    pub fn multiplier(&self) -> Option<&IMultiplier> {
        self.mult.as_ref()
    }

    pub fn report(&self, c: &SpectralCoeffs) -> Result<EnergyReport> {
        let iu = match &self.mult {
            Some(m) => apply_i(c, m),
            None => c.clone(),
        };
        let kinetic = 0.5
            * iu
                .basis()
                .modes()
                .iter()
                .zip(iu.values())
                .map(|(m, v)| m.eigenvalue * v.norm_sqr())
                .sum::<f64>();
        let field = self.transform.synthesize(&iu)?;
        let potential = 0.25
            * field
                .values()
                .iter()
                .zip(field.grid().weights())
                .map(|(v, w)| {
                    let a = v.norm_sqr();
                    w * a * a
                })
                .sum::<f64>();
        let s = self.mult.map_or(1.0, |m| m.s);
        Ok(EnergyReport {
            mass: c.mass(),
            kinetic,
            potential,
            modified_energy: kinetic + potential,
            h_s_norm: sobolev_norm(c, s),
        })
    }
}

/// Mass, `I`-modified kinetic and potential energy of `c`.
pub fn functionals(c: &SpectralCoeffs, mult: &IMultiplier) -> Result<EnergyReport> {
    EnergyEvaluator::new(Arc::clone(c.basis()), Some(*mult))?.report(c)
}

/// `E[u] = ½∫|∇u|² + ¼∫|u|⁴`.
pub fn hamiltonian(c: &SpectralCoeffs) -> Result<f64> {
    Ok(EnergyEvaluator::new(Arc::clone(c.basis()), None)?
        .report(c)?
        .modified_energy)
}

/// `u₀(x) = λ⁻¹ U₀(x/λ)` on the surface dilated by a further factor `λ`.
///
/// In the orthonormal bases the coefficients are unchanged; only the basis
/// moves, which keeps the `L²` norm exactly.
pub fn rescale_data(u0: &SpectralCoeffs, lambda: f64) -> Result<SpectralCoeffs> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rescaling factor must be positive, got {lambda}"
        )));
    }
    let basis = u0.basis().rescaled(u0.basis().scale() * lambda)?;
    SpectralCoeffs::new(basis, u0.values().to_vec())
}

/// `‖u₀‖_{Ḣ^s(M_λ)}` and `λ^{-s}‖U₀‖_{Ḣ^s(M)}` for `u₀ = rescale_data(U₀, λ)`.
pub fn homogeneous_scaling_pair(u0: &SpectralCoeffs, lambda: f64, s: f64) -> Result<(f64, f64)> {
    let scaled = rescale_data(u0, lambda)?;
    Ok((
        homogeneous_sobolev_norm(&scaled, s),
        lambda.powf(-s) * homogeneous_sobolev_norm(u0, s),
    ))
}

/// `∫|∇Iu₀|² / (N^{2(1-s)} λ^{-2s} ‖U₀‖²_{H^s})` for `u₀ = rescale_data(U₀, λ)`.
pub fn kinetic_bound_constant(u0: &SpectralCoeffs, mult: &IMultiplier, lambda: f64) -> Result<f64> {
    let scaled = rescale_data(u0, lambda)?;
    let iu = apply_i(&scaled, mult);
    let grad: f64 = iu
        .basis()
        .modes()
        .iter()
        .zip(iu.values())
        .map(|(m, v)| m.eigenvalue * v.norm_sqr())
        .sum();
    let hs = sobolev_norm(u0, mult.s);
    let scale = mult.n_cut.powf(2.0 * (1.0 - mult.s)) * lambda.powf(-2.0 * mult.s) * hs * hs;
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(grad / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPlan {
    pub n_cut: f64,
    pub s: f64,
    pub delta: f64,
    /// `λ = N^{(1-s)/s}`.
    pub lambda: f64,
    /// `⌊λ N^{1/2}⌋` local steps.
    pub iterations: u64,
    /// Original-time horizon `δ λ N^{1/2} / λ²`.
    pub t_final: f64,
    /// `2s(1-s)/(3s-2)`.
    pub growth_exponent: f64,
}

pub const DEFAULT_DELTA: f64 = 0.5;

pub fn scaling_plan(n_cut: f64, s: f64, delta: f64) -> Result<ScalingPlan> {
    if !(s > 2.0 / 3.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "scaling plan needs s in (2/3, 1], got {s}"
        )));
    }
    if !(n_cut >= 2.0 && n_cut.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scaling plan needs N >= 2, got {n_cut}"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "local step delta must be positive, got {delta}"
        )));
    }
    let lambda = n_cut.powf((1.0 - s) / s);
    let steps = lambda * n_cut.sqrt();
    Ok(ScalingPlan {
        n_cut,
        s,
        delta,
        lambda,
        iterations: (steps * (1.0 + 1e-12)).floor() as u64,
        t_final: delta * steps / (lambda * lambda),
        growth_exponent: 2.0 * s * (1.0 - s) / (3.0 * s - 2.0),
    })
}

/// `⟨u, v⟩ = Σ conj(u_k) v_k`.
pub fn inner(u: &SpectralCoeffs, v: &SpectralCoeffs) -> Complex64 {
    u.values().iter().zip(v.values()).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{ManifoldKind, ModeLabel};
    use std::f64::consts::PI;

    #[test]
    fn multiplier_branches() {
        let m = IMultiplier::new(8.0, 0.75).unwrap();
        assert_eq!(m.value(3.0), 1.0);
        assert_eq!(m.value(8.0), 1.0);
        assert!((m.value(32.0) - 4f64.powf(-0.25)).abs() < 1e-15);
        let at2 = 2f64.powf(-0.25);
        assert!((m.value(16.0) - at2).abs() < 1e-15);
        assert!((m.value(16.0 * (1.0 - 1e-12)) - at2).abs() < 1e-12);
    }

    #[test]
    fn multiplier_monotone_on_log_grid() {
        let m = IMultiplier::new(5.0, 0.6).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..10_000 {
            let k = 10f64.powf(-2.0 + 5.0 * i as f64 / 9_999.0);
            let v = m.value(k);
            assert!(v <= prev && v > 0.0 && v <= 1.0);
            prev = v;
        }
    }

    #[test]
    fn second_difference_continuous_at_joins() {
        let s = 0.7;
        let h = 1e-4;
        let d2 = |t: f64| (m0(t + h, s) - 2.0 * m0(t, s) + m0(t - h, s)) / (h * h);
        for t in [1.0, 2.0] {
            let left = d2(t - 3.0 * h);
            let right = d2(t + 3.0 * h);
            assert!((left - right).abs() < 1e-2, "t={t}: {left} vs {right}");
        }
    }

    #[test]
    fn symbol_estimates_for_m() {
        let m = IMultiplier::new(16.0, 0.7).unwrap();
        let mut worst = [0.0f64; 2];
        let mut k = 8.0;
        while k <= 128.0 {
            let h = 1e-3 * k;
            let d1 = (m.value(k + h) - m.value(k - h)) / (2.0 * h);
            let d2 = (m.value(k + h) - 2.0 * m.value(k) + m.value(k - h)) / (h * h);
            worst[0] = worst[0].max(d1.abs() * k / m.value(k));
            worst[1] = worst[1].max(d2.abs() * k * k / m.value(k));
            k += 0.25;
        }
        assert!(worst[0] < 3.0 && worst[1] < 10.0, "{worst:?}");
    }

    #[test]
    fn character_functionals() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 4.0, 1.0).unwrap();
        let a = Complex64::new(0.6, -0.3);
        // Unnormalized character a·e^{iξx} has coefficient 2π·a.
        let c = SpectralCoeffs::single_mode(b, ModeLabel::Lattice(2, 1), a * 2.0 * PI).unwrap();
        let r = functionals(&c, &IMultiplier::new(10.0, 0.7).unwrap()).unwrap();
        let vol = 4.0 * PI * PI;
        let a2 = a.norm_sqr();
        assert!((r.mass - vol * a2).abs() < 1e-12);
        assert!((r.kinetic - 0.5 * vol * a2 * 5.0).abs() < 1e-12);
        assert!((r.potential - 0.25 * vol * a2 * a2).abs() < 1e-13);
    }

    #[test]
    fn zero_field_functionals() {
        let b = SpectralBasis::new(ManifoldKind::Sphere, 5.0, 1.0).unwrap();
        let r = functionals(&SpectralCoeffs::zeros(b), &IMultiplier::new(2.0, 0.8).unwrap()).unwrap();
        assert_eq!(
            (r.mass, r.kinetic, r.potential, r.modified_energy),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn plan_arithmetic() {
        let p = scaling_plan(16.0, 0.8, 0.5).unwrap();
        assert!((p.lambda - 2.0).abs() < 1e-15);
        assert_eq!(p.iterations, 8);
        assert!((p.t_final - 0.5 * 8.0 / 4.0).abs() < 1e-15);
        assert!((p.growth_exponent - 0.8).abs() < 1e-15);
        assert_eq!(scaling_plan(16.0, 1.0, 0.5).unwrap().growth_exponent, 0.0);
        assert!(scaling_plan(16.0, 2.0 / 3.0, 0.5).is_err());
        assert!(scaling_plan(1.0, 0.8, 0.5).is_err());
    }

    #[test]
    fn rescale_keeps_mass() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 3.0, 1.0).unwrap();
        let vals: Vec<Complex64> = (0..b.len())
            .map(|i| Complex64::new((i as f64).sin(), (2.0 * i as f64).cos()))
            .collect();
        let u = SpectralCoeffs::new(b, vals).unwrap();
        let v = rescale_data(&u, 3.0).unwrap();
        assert_eq!(u.mass(), v.mass());
        assert_eq!(v.basis().scale(), 3.0);
        let (l, r) = homogeneous_scaling_pair(&u, 3.0, 0.7).unwrap();
        assert!((l - r).abs() <= 1e-12 * r);
    }
}
