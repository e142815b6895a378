//! Time integration of `i u_t + Δu = |u|²u` in an eigenbasis.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imethod::{EnergyEvaluator, EnergyReport, IMultiplier};
use crate::spectra::SpectralCoeffs;
use crate::transform::{QuadratureGrid, SpectralTransform};

/// `e^{itΔ}`: multiplies coefficient `k` by `exp(-i ν_k t)`.
pub fn linear_propagate(c: &SpectralCoeffs, t: f64) -> SpectralCoeffs {
    c.map_modes(|m, v| v * Complex64::from_polar(1.0, -m.eigenvalue * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Strang splitting: exact linear half steps around an exact pointwise
    /// phase rotation.
    SplitStepStrang,
    /// Classical RK4 on the Galerkin system.
    ReferenceRk4,
    /// Lawson RK4 in the interaction picture: the linear flow is exact and
    /// RK4 acts on the Galerkin cubic term only, so `dt` is not limited by
    /// `ν_max`.
    IntegratingFactorRk4,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split-step" | "split-step-strang" => Ok(Scheme::SplitStepStrang),
            "rk4" | "reference-rk4" => Ok(Scheme::ReferenceRk4),
            "if-rk4" | "integrating-factor-rk4" => Ok(Scheme::IntegratingFactorRk4),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme `{other}` (expected split-step, rk4 or if-rk4)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Record every this many steps; the final state is always recorded.
    pub record_every: usize,
    /// Multiplier used for the recorded modified energies.
    pub mult: Option<IMultiplier>,
    /// Switch off the cubic term to get the free flow.
    pub nonlinear: bool,
    /// RK4 requires `dt <= stability_factor / ν_max`.
    pub stability_factor: f64,
}

impl EvolveConfig {
    pub fn new(dt: f64, t_final: f64, scheme: Scheme) -> Self {
        EvolveConfig {
            dt,
            t_final,
            scheme,
            record_every: 1,
            mult: None,
            nonlinear: true,
            stability_factor: 0.5,
        }
    }

    pub fn with_record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    pub fn with_multiplier(mut self, mult: IMultiplier) -> Self {
        self.mult = Some(mult);
        self
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// Number of steps; `dt` is shrunk slightly so that they land on `T`.
    pub fn step_count(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    fn validate(&self, nu_max: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt * (1.0 - 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "final time {} must be at least dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        if self.scheme == Scheme::ReferenceRk4 && nu_max > 0.0 {
            let limit = self.stability_factor / nu_max;
            if self.dt > limit {
                return Err(Error::InvalidParameter(format!(
                    "dt = {} exceeds the RK4 stability limit {limit:.3e} (factor {} / nu_max {nu_max})",
                    self.dt, self.stability_factor
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralCoeffs>,
    /// Functionals at each recorded time, modified by `cfg.mult` if present.
    pub reports: Vec<EnergyReport>,
    /// Unmodified Hamiltonian at each recorded time.
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralCoeffs {
        self.states.last().expect("trajectories hold at least the initial state")
    }
}

/// Right-hand side machinery shared by both schemes.
struct Nonlinearity {
    transform: SpectralTransform,
    degree: usize,
}

impl Nonlinearity {
    fn new(c: &SpectralCoeffs) -> Result<Self> {
        let basis = c.basis();
        let k = basis.bandwidth();
        let grid = QuadratureGrid::for_degree(basis.manifold(), basis.scale(), 4 * k)?;
        Ok(Nonlinearity {
            transform: SpectralTransform::new(Arc::clone(basis), grid)?,
            degree: 3 * k,
        })
    }

    /// Galerkin projection of `|u|²u`.
    fn cubic(&self, c: &SpectralCoeffs) -> Result<SpectralCoeffs> {
        let mut f = self.transform.synthesize(c)?;
        f.values_mut().iter_mut().for_each(|v| *v *= v.norm_sqr());
        self.transform.analyze_exact(&f, self.degree)
    }

    /// `u ↦ u·exp(-i|u|² h)` on the grid, projected back onto the basis.
    fn phase_rotation(&self, c: &SpectralCoeffs, h: f64) -> Result<SpectralCoeffs> {
        let mut f = self.transform.synthesize(c)?;
        f.values_mut()
            .iter_mut()
            .for_each(|v| *v *= Complex64::from_polar(1.0, -v.norm_sqr() * h));
        self.transform.analyze_truncated(&f)
    }
}

fn rk4_rhs(c: &SpectralCoeffs, nl: Option<&Nonlinearity>) -> Result<SpectralCoeffs> {
    let minus_i = Complex64::new(0.0, -1.0);
    let lin = c.map_modes(|m, v| minus_i * m.eigenvalue * v);
    match nl {
        Some(nl) => lin.axpy(minus_i, &nl.cubic(c)?),
        None => Ok(lin),
    }
}

fn step(
    c: &SpectralCoeffs,
    h: f64,
    scheme: Scheme,
    nl: Option<&Nonlinearity>,
) -> Result<SpectralCoeffs> {
    match scheme {
        Scheme::SplitStepStrang => {
            let half = linear_propagate(c, 0.5 * h);
            let rotated = match nl {
                Some(nl) => nl.phase_rotation(&half, h)?,
                None => half,
            };
            Ok(linear_propagate(&rotated, 0.5 * h))
        }
        Scheme::ReferenceRk4 => {
            let hc = Complex64::new(h, 0.0);
            let k1 = rk4_rhs(c, nl)?;
            let k2 = rk4_rhs(&c.axpy(hc * 0.5, &k1)?, nl)?;
            let k3 = rk4_rhs(&c.axpy(hc * 0.5, &k2)?, nl)?;
            let k4 = rk4_rhs(&c.axpy(hc, &k3)?, nl)?;
            let mut out = c.clone();
            for (i, o) in out.values_mut().iter_mut().enumerate() {
                *o += hc / 6.0
                    * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i]);
            }
            Ok(out)
        }
        Scheme::IntegratingFactorRk4 => {
            let Some(nl) = nl else {
                return Ok(linear_propagate(c, h));
            };
            let minus_i = Complex64::new(0.0, -1.0);
            let f = |u: &SpectralCoeffs| -> Result<SpectralCoeffs> { Ok(nl.cubic(u)?.scaled(minus_i)) };
            let hc = Complex64::new(h, 0.0);
            let half = Complex64::new(0.5 * h, 0.0);
            let c_half = linear_propagate(c, 0.5 * h);
            let c_full = linear_propagate(c, h);
            let k1 = f(c)?;
            let k2 = f(&linear_propagate(&c.axpy(half, &k1)?, 0.5 * h))?;
            let k3 = f(&c_half.axpy(half, &k2)?)?;
            let k4 = f(&c_full.axpy(hc, &linear_propagate(&k3, 0.5 * h))?)?;
            let k1 = linear_propagate(&k1, h);
            let mid = linear_propagate(&k2.axpy(Complex64::new(1.0, 0.0), &k3)?, 0.5 * h);
            let mut out = c_full;
            for (i, o) in out.values_mut().iter_mut().enumerate() {
                *o += hc / 6.0 * (k1.values()[i] + 2.0 * mid.values()[i] + k4.values()[i]);
            }
            Ok(out)
        }
    }
}

/// Integrates from `c0` to `cfg.t_final`.
pub fn evolve(c0: &SpectralCoeffs, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate(c0.basis().max_eigenvalue())?;
    let nl = if cfg.nonlinear {
        Some(Nonlinearity::new(c0)?)
    } else {
        None
    };
    let evaluator = EnergyEvaluator::new(Arc::clone(c0.basis()), cfg.mult)?;
    let plain = if cfg.mult.is_some() {
        Some(EnergyEvaluator::new(Arc::clone(c0.basis()), None)?)
    } else {
        None
    };
    let steps = cfg.step_count();
    let h = cfg.t_final / steps as f64;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        reports: Vec::new(),
        energies: Vec::new(),
    };
    let record = |t: f64, c: &SpectralCoeffs, traj: &mut Trajectory| -> Result<()> {
        let report = evaluator.report(c)?;
        let energy = match &plain {
            Some(p) => p.report(c)?.modified_energy,
            None => report.modified_energy,
        };
        traj.times.push(t);
        traj.states.push(c.clone());
        traj.reports.push(report);
        traj.energies.push(energy);
        Ok(())
    };

    record(0.0, c0, &mut traj)?;
    let mut c = c0.clone();
    for n in 1..=steps {
        let before = c.mass();
        c = step(&c, h, cfg.scheme, nl.as_ref())?;
        let after = c.mass();
        if !after.is_finite() || (before > 0.0 && after > 10.0 * before) {
            return Err(Error::Unstable {
                time: n as f64 * h,
                mass_before: before,
                mass_after: after,
            });
        }
        if n % cfg.record_every == 0 || n == steps {
            record(n as f64 * h, &c, &mut traj)?;
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifiedEnergySeries {
    pub points: Vec<(f64, f64)>,
    /// `sup_t |Ẽ[u(t)] - Ẽ[u(0)]|` over the recorded times.
    pub sup_increment: f64,
}

/// `Ẽ[u(t)]` along a trajectory for the given multiplier.
pub fn modified_energy_series(traj: &Trajectory, mult: &IMultiplier) -> Result<ModifiedEnergySeries> {
    let Some(first) = traj.states.first() else {
        return Ok(ModifiedEnergySeries {
            points: Vec::new(),
            sup_increment: 0.0,
        });
    };
    let evaluator = EnergyEvaluator::new(Arc::clone(first.basis()), Some(*mult))?;
    let mut points = Vec::with_capacity(traj.states.len());
    for (t, c) in traj.times.iter().zip(&traj.states) {
        points.push((*t, evaluator.report(c)?.modified_energy));
    }
    let e0 = points[0].1;
    let sup_increment = points.iter().map(|(_, e)| (e - e0).abs()).fold(0.0, f64::max);
    Ok(ModifiedEnergySeries {
        points,
        sup_increment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{ManifoldKind, ModeLabel, SpectralBasis};
    use std::f64::consts::PI;

    #[test]
    fn linear_propagation_phase_and_mass() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 3.0, 1.0).unwrap();
        let c = SpectralCoeffs::new(
            Arc::clone(&b),
            (0..b.len()).map(|i| Complex64::new(1.0, i as f64)).collect(),
        )
        .unwrap();
        assert_eq!(linear_propagate(&c, 0.0).values(), c.values());
        let p = linear_propagate(&c, 0.37);
        assert!((p.mass() - c.mass()).abs() < 1e-12 * c.mass());
        let k = b.index_of(ModeLabel::Lattice(2, 1)).unwrap();
        let expect = c.values()[k] * Complex64::from_polar(1.0, -5.0 * 0.37);
        assert!((p.values()[k] - expect).norm() < 1e-14);
    }

    #[test]
    fn zero_data_stays_zero() {
        let b = SpectralBasis::new(ManifoldKind::Sphere, 4.0, 1.0).unwrap();
        let z = SpectralCoeffs::zeros(b);
        let traj = evolve(&z, &EvolveConfig::new(0.01, 0.05, Scheme::SplitStepStrang)).unwrap();
        assert!(traj.final_state().values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        assert_eq!(traj.times.len(), 6);
    }

    #[test]
    fn single_mode_exact_solution() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 3.0, 1.0).unwrap();
        let a = Complex64::new(0.8, 0.1);
        let xi = ModeLabel::Lattice(1, -2);
        let c0 = SpectralCoeffs::single_mode(Arc::clone(&b), xi, a * 2.0 * PI).unwrap();
        let t = 0.5;
        let traj = evolve(&c0, &EvolveConfig::new(1e-2, t, Scheme::SplitStepStrang)).unwrap();
        let phase = Complex64::from_polar(1.0, -(5.0 + a.norm_sqr()) * t);
        let got = traj.final_state().get(xi).unwrap();
        assert!((got - a * 2.0 * PI * phase).norm() < 1e-12);
        assert!((traj.final_state().mass() - c0.mass()).abs() < 1e-12);
    }

    #[test]
    fn integrating_factor_single_mode_and_order() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 3.0, 1.0).unwrap();
        let a = Complex64::new(0.8, 0.1);
        let xi = ModeLabel::Lattice(1, -2);
        let c0 = SpectralCoeffs::single_mode(Arc::clone(&b), xi, a * 2.0 * PI).unwrap();
        let t = 0.5;
        let traj = evolve(&c0, &EvolveConfig::new(1e-2, t, Scheme::IntegratingFactorRk4)).unwrap();
        let phase = Complex64::from_polar(1.0, -(5.0 + a.norm_sqr()) * t);
        let got = traj.final_state().get(xi).unwrap();
        assert!((got - a * 2.0 * PI * phase).norm() < 1e-9);

        let b = SpectralBasis::new(ManifoldKind::Torus, 5.0, 1.0).unwrap();
        let c = SpectralCoeffs::new(
            Arc::clone(&b),
            (0..b.len()).map(|i| Complex64::new(2.0 + (i as f64).sin(), 1.0) / (1.0 + i as f64)).collect(),
        )
        .unwrap();
        let run = |dt: f64| {
            evolve(&c, &EvolveConfig::new(dt, 0.2, Scheme::IntegratingFactorRk4).with_record_every(1000))
                .unwrap()
                .final_state()
                .clone()
        };
        let fine = run(1e-3);
        let e1 = run(2e-2).l2_distance(&fine).unwrap();
        let e2 = run(1e-2).l2_distance(&fine).unwrap();
        assert!(e1 / e2 > 12.0, "order ratio {}", e1 / e2);
    }

    #[test]
    fn rk4_refuses_unstable_dt() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 10.0, 1.0).unwrap();
        let c = SpectralCoeffs::zeros(b);
        let err = evolve(&c, &EvolveConfig::new(0.1, 1.0, Scheme::ReferenceRk4)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn linear_flow_keeps_kinetic_part() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 6.0, 1.0).unwrap();
        let c = SpectralCoeffs::new(
            Arc::clone(&b),
            (0..b.len())
                .map(|i| Complex64::new((i as f64 * 0.3).cos(), 0.1) / (1.0 + i as f64))
                .collect(),
        )
        .unwrap();
        let mult = IMultiplier::new(2.0, 0.7).unwrap();
        let cfg = EvolveConfig::new(0.01, 0.2, Scheme::SplitStepStrang)
            .linear_only()
            .with_multiplier(mult);
        let traj = evolve(&c, &cfg).unwrap();
        let k0 = traj.reports[0].kinetic;
        assert!(traj.reports.iter().all(|r| (r.kinetic - k0).abs() <= 1e-13 * k0));
    }
}
