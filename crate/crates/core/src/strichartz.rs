//! Space-time norms of free Schrödinger evolutions.
//!
//! Time integrals use composite Simpson on a node set whose spacing resolves
//! the fastest phase in the integrand; space integrals use exact quadrature.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{ManifoldKind, SpectralBasis, SpectralCoeffs};
use crate::transform::{GridField, QuadratureGrid, SpectralTransform};

/// `Λ(T, N₁, N₂)`: `(N₂/N₁)^{1/2}` for `T ≤ 1/N₁`, else `(T N₂)^{1/2}`.
pub fn lambda_reference(t: f64, n1: f64, n2: f64) -> f64 {
    if t <= 1.0 / n1 {
        (n2 / n1).sqrt()
    } else {
        (t * n2).sqrt()
    }
}

/// Smallest odd node count on `[0, t]` with spacing `<= π / (8 ω)`.
pub fn required_time_nodes(t: f64, omega: f64) -> usize {
    if omega <= 0.0 {
        return 3;
    }
    let intervals = (8.0 * omega * t / PI).ceil().max(2.0) as usize;
    let intervals = intervals + intervals % 2;
    intervals + 1
}

/// Odd node count at which composite Simpson integrates `e^{iωt}` over
/// `[0, t]` to relative error about `rel_tol` (`(ωh)⁴/180 ≤ rel_tol`); never
/// fewer than [`required_time_nodes`].
pub fn time_nodes_for_tolerance(t: f64, omega: f64, rel_tol: f64) -> usize {
    let base = required_time_nodes(t, omega);
    if omega <= 0.0 || !(rel_tol > 0.0) {
        return base;
    }
    let h = (180.0 * rel_tol).powf(0.25) / omega;
    let intervals = (t / h).ceil().max(2.0) as usize;
    let intervals = intervals + intervals % 2;
    base.max(intervals + 1)
}

/// Composite Simpson weights for `n` (odd) equispaced nodes on `[0, t]`.
fn simpson_weights(n: usize, t: f64) -> Vec<f64> {
    let h = t / (n - 1) as f64;
    (0..n)
        .map(|j| {
            let w = if j == 0 || j == n - 1 {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

fn check_nodes(time_nodes: usize, t: f64, omega: f64) -> Result<()> {
    if time_nodes < 3 || time_nodes % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "Simpson's rule needs an odd node count >= 3, got {time_nodes}"
        )));
    }
    let required = required_time_nodes(t, omega);
    if time_nodes < required {
        return Err(Error::InsufficientTimeResolution {
            required,
            given: time_nodes,
        });
    }
    Ok(())
}

fn check_horizon(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time horizon must be positive, got {t}")))
    }
}

fn max_support_eigenvalue(c: &SpectralCoeffs) -> f64 {
    c.basis()
        .modes()
        .iter()
        .zip(c.values())
        .filter(|(_, v)| v.norm_sqr() > 0.0)
        .map(|(m, _)| m.eigenvalue)
        .fold(0.0, f64::max)
}

/// Samples `e^{itΔ}c` on a fixed grid for arbitrary `t`.
struct FreeEvolution<'a> {
    c: &'a SpectralCoeffs,
    transform: SpectralTransform,
}

impl<'a> FreeEvolution<'a> {
    fn new(c: &'a SpectralCoeffs, grid: &Arc<QuadratureGrid>) -> Result<Self> {
        Ok(FreeEvolution {
            c,
            transform: SpectralTransform::new(Arc::clone(c.basis()), Arc::clone(grid))?,
        })
    }

    fn at(&self, t: f64) -> Result<GridField> {
        self.transform
            .synthesize(&crate::solver::linear_propagate(self.c, t))
    }
}

/// `‖e^{itΔ}u₀ · e^{itΔ}v₀‖_{L²([0,T] × M_λ)}`.
///
/// Refuses with the required node count when `time_nodes` does not resolve
/// `ω_max = max ν_u + max ν_v` at spacing `π/(8ω_max)`.
pub fn bilinear_norm(
    u0: &SpectralCoeffs,
    v0: &SpectralCoeffs,
    t: f64,
    time_nodes: usize,
) -> Result<f64> {
    check_horizon(t)?;
    if !u0.basis().same_surface(v0.basis()) {
        return Err(Error::Mismatch("bilinear inputs live on different surfaces".into()));
    }
    let omega = max_support_eigenvalue(u0) + max_support_eigenvalue(v0);
    check_nodes(time_nodes, t, omega)?;
    let basis = u0.basis();
    let degree = 2 * (u0.support_bandwidth() + v0.support_bandwidth());
    let grid = QuadratureGrid::for_degree(basis.manifold(), basis.scale(), degree)?;
    let fu = FreeEvolution::new(u0, &grid)?;
    let fv = FreeEvolution::new(v0, &grid)?;
    let weights = simpson_weights(time_nodes, t);
    let h = t / (time_nodes - 1) as f64;
    let mut total = 0.0;
    for (j, wt) in weights.iter().enumerate() {
        let tj = j as f64 * h;
        let a = fu.at(tj)?;
        let b = fv.at(tj)?;
        let slice: f64 = a
            .values()
            .iter()
            .zip(b.values())
            .zip(grid.weights())
            .map(|((x, y), w)| w * (x * y).norm_sqr())
            .sum();
        total += wt * slice;
    }
    Ok(total.max(0.0).sqrt())
}

/// Both sides of the dilation identity for the bilinear norm: the norm over
/// `[0,1] × M_λ` and `λ²` times the norm over `[0, λ⁻²] × M` of
/// `ũ₀(x) = u₀(λx)`, `ṽ₀(x) = v₀(λx)`.
pub fn rescaled_bilinear_pair(
    u0: &SpectralCoeffs,
    v0: &SpectralCoeffs,
    time_nodes: usize,
) -> Result<(f64, f64)> {
    let lambda = u0.basis().scale();
    let lhs = bilinear_norm(u0, v0, 1.0, time_nodes)?;
    let shrink = |c: &SpectralCoeffs| -> Result<SpectralCoeffs> {
        SpectralCoeffs::new(
            c.basis().rescaled(1.0)?,
            c.values().iter().map(|v| v / lambda).collect(),
        )
    };
    let rhs = lambda * lambda
        * bilinear_norm(&shrink(u0)?, &shrink(v0)?, 1.0 / (lambda * lambda), time_nodes)?;
    Ok((lhs, rhs))
}

/// Independent complex Gaussian coefficients on the modes with frequency in
/// `[a, b)`, normalized to unit `L²`.
pub fn random_localized<R: Rng + ?Sized>(
    basis: &Arc<SpectralBasis>,
    a: f64,
    b: f64,
    rng: &mut R,
) -> Result<SpectralCoeffs> {
    let mut c = SpectralCoeffs::zeros(Arc::clone(basis));
    let mut any = false;
    for (m, v) in basis.modes().iter().zip(c.values_mut()) {
        if m.frequency >= a && m.frequency < b {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v = Complex64::new(re, im);
            any = true;
        }
    }
    if !any {
        return Err(Error::InvalidParameter(format!(
            "no eigenfrequencies in [{a}, {b}) on this basis"
        )));
    }
    let norm = c.l2_norm();
    Ok(c.scaled(Complex64::new(1.0 / norm, 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepRegime {
    /// `T = 1/N₁` on the given surface.
    Semiclassical,
    /// `T = 1` on `M_λ`, compared against `Λ(λ⁻², λN₁, λN₂)`.
    Rescaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub manifold: ManifoldKind,
    pub n1_list: Vec<u64>,
    pub n2: u64,
    pub lambda: f64,
    pub trials: usize,
    pub seed: u64,
    pub regime: SweepRegime,
    /// Draw `v₀` from the whole ball `[0, 2N₂)` instead of `[N₂, 2N₂)`.
    pub low_frequency_ball: bool,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzSample {
    pub manifold: ManifoldKind,
    pub lambda: f64,
    #[serde(rename = "N1")]
    pub n1: u64,
    #[serde(rename = "N2")]
    pub n2: u64,
    #[serde(rename = "T")]
    pub t: f64,
    pub trial: usize,
    pub measured: f64,
    pub reference: f64,
    pub ratio: f64,
    pub seed: u64,
}

/// Deterministic per-(N₁, trial) generator.
pub fn trial_rng(seed: u64, n1: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((n1 << 20) ^ trial as u64);
    rng
}

pub fn strichartz_sweep(cfg: &SweepConfig) -> Result<Vec<StrichartzSample>> {
    if cfg.n1_list.is_empty() || cfg.trials == 0 {
        return Err(Error::InvalidParameter("sweep needs at least one N1 and one trial".into()));
    }
    let min_n1 = *cfg.n1_list.iter().min().unwrap();
    if cfg.n2 == 0 || cfg.n2 > min_n1 {
        return Err(Error::InvalidParameter(format!(
            "N2 = {} must be positive and at most min N1 = {min_n1}",
            cfg.n2
        )));
    }
    let jobs: Vec<(u64, usize)> = cfg
        .n1_list
        .iter()
        .flat_map(|&n1| (0..cfg.trials).map(move |t| (n1, t)))
        .collect();
    let run = |&(n1, trial): &(u64, usize)| -> Result<StrichartzSample> {
        let basis = SpectralBasis::new(cfg.manifold, 2.0 * n1 as f64, cfg.lambda)?;
        let mut rng = trial_rng(cfg.seed, n1, trial);
        let u0 = random_localized(&basis, n1 as f64, 2.0 * n1 as f64, &mut rng)?;
        let low = if cfg.low_frequency_ball { 0.0 } else { cfg.n2 as f64 };
        let v0 = random_localized(&basis, low, 2.0 * cfg.n2 as f64, &mut rng)?;
        let (t, reference) = match cfg.regime {
            SweepRegime::Semiclassical => {
                let t = 1.0 / n1 as f64;
                (t, lambda_reference(t, n1 as f64, cfg.n2 as f64))
            }
            SweepRegime::Rescaled => {
                let l = cfg.lambda;
                (
                    1.0,
                    lambda_reference(1.0 / (l * l), l * n1 as f64, l * cfg.n2 as f64),
                )
            }
        };
        let omega = max_support_eigenvalue(&u0) + max_support_eigenvalue(&v0);
        let measured = bilinear_norm(&u0, &v0, t, required_time_nodes(t, omega))?;
        Ok(StrichartzSample {
            manifold: cfg.manifold,
            lambda: cfg.lambda,
            n1,
            n2: cfg.n2,
            t,
            trial,
            measured,
            reference,
            ratio: measured / reference,
            seed: cfg.seed,
        })
    };
    if cfg.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(run).collect())
    } else {
        jobs.iter().map(run).collect()
    }
}

/// Supported `L^q_t L^r_x` exponent pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrichartzPair {
    /// `L⁴_t L⁴_x`.
    L4L4,
    /// `L⁸_t L^{8/3}_x`.
    L8L8Over3,
    /// `L⁸_{t,x}`.
    L8L8,
}

impl StrichartzPair {
    pub fn from_exponents(q: f64, r: f64) -> Result<Self> {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        if close(q, 4.0) && close(r, 4.0) {
            Ok(StrichartzPair::L4L4)
        } else if close(q, 8.0) && close(r, 8.0 / 3.0) {
            Ok(StrichartzPair::L8L8Over3)
        } else if close(q, 8.0) && close(r, 8.0) {
            Ok(StrichartzPair::L8L8)
        } else {
            Err(Error::Unsupported(format!(
                "Strichartz pair (q, r) = ({q}, {r}); supported: (4,4), (8,8/3), (8,8)"
            )))
        }
    }

    pub fn exponents(self) -> (f64, f64) {
        match self {
            StrichartzPair::L4L4 => (4.0, 4.0),
            StrichartzPair::L8L8Over3 => (8.0, 8.0 / 3.0),
            StrichartzPair::L8L8 => (8.0, 8.0),
        }
    }
}

/// `‖e^{itΔ}u₀‖_{L^q([0,T]; L^r(M_λ))}`.
///
/// Even `r` is integrated exactly in space; for `r = 8/3` the spatial grid
/// is exact to degree `8K` and the result carries quadrature error.
pub fn linear_strichartz_norm(
    u0: &SpectralCoeffs,
    pair: StrichartzPair,
    t: f64,
    time_nodes: usize,
) -> Result<f64> {
    check_horizon(t)?;
    let (q, r) = pair.exponents();
    let omega = 0.5 * q.max(r) * max_support_eigenvalue(u0);
    check_nodes(time_nodes, t, omega)?;
    let k = u0.support_bandwidth();
    let degree = match pair {
        StrichartzPair::L4L4 => 4 * k,
        StrichartzPair::L8L8Over3 | StrichartzPair::L8L8 => 8 * k,
    };
    let basis = u0.basis();
    let grid = QuadratureGrid::for_degree(basis.manifold(), basis.scale(), degree)?;
    let fu = FreeEvolution::new(u0, &grid)?;
    let weights = simpson_weights(time_nodes, t);
    let h = t / (time_nodes - 1) as f64;
    let mut total = 0.0;
    for (j, wt) in weights.iter().enumerate() {
        let lr = fu.at(j as f64 * h)?.integrate_abs_pow(r).powf(1.0 / r);
        total += wt * lr.powf(q);
    }
    Ok(total.max(0.0).powf(1.0 / q))
}
