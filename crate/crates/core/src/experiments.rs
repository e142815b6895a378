//! Experiment families behind the command-line runner.
//!
//! Each family resolves its keys from a [`ConfigSource`] into a spec struct
//! (defaults filled in), runs, and returns a [`RunOutput`] with CSV tables,
//! manifest results and pass/fail checks.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigSource, Experiment, LambdaRule};
use crate::error::{Error, Result};
use crate::imethod::{rescale_data, scaling_plan, IMultiplier, DEFAULT_DELTA};
use crate::locality::{an_identity_check, cluster_decay_table};
use crate::record::{write_run, RunOutput};
use crate::solver::{evolve, EvolveConfig, Scheme};
use crate::spectra::{ManifoldKind, ModeLabel, SpectralBasis, SpectralCoeffs};
use crate::strichartz::{strichartz_sweep, SweepConfig, SweepRegime};
use crate::tensorizer::{symbol_estimate_check, tensorize, Extension, ResonantBlock, TensorizeOptions};
use crate::transform::{correlation_integral, Factor};

/// Complex Gaussian coefficients with envelope `(1 + ν₀)^{-decay/2}`, `ν₀`
/// the eigenvalue on the unit surface, scaled to the given mass.
pub fn smooth_random_data(
    basis: &Arc<SpectralBasis>,
    decay: f64,
    mass: f64,
    seed: u64,
) -> Result<SpectralCoeffs> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = SpectralCoeffs::zeros(Arc::clone(basis));
    for (m, v) in basis.modes().iter().zip(c.values_mut()) {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let env = (1.0 + m.label.base_eigenvalue() as f64).powf(-0.5 * decay);
        *v = Complex64::new(re, im) * env;
    }
    let m0 = c.mass();
    if m0 == 0.0 {
        return Err(Error::InvalidParameter("empty basis".into()));
    }
    Ok(c.scaled(Complex64::new((mass / m0).sqrt(), 0.0)))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn run_pool<T: Send, F>(workers: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if workers <= 1 {
        return (0..jobs).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| (0..jobs).into_par_iter().map(f).collect())
}

fn parse_key<T: std::str::FromStr<Err = Error>>(
    src: &ConfigSource,
    key: &str,
    v: &Option<String>,
    default: T,
) -> Result<T> {
    match v {
        Some(text) => text.parse().map_err(|e: Error| src.error(key, e)),
        None => Ok(default),
    }
}

fn regularity(src: &ConfigSource, default: f64) -> Result<f64> {
    let s = src.config.s.unwrap_or(default);
    if !(s > 0.5 && s <= 1.0) {
        return Err(src.error("s", format!("must lie in (1/2, 1], got {s}")));
    }
    Ok(s)
}

// ---------------------------------------------------------------- evolve

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveSpec {
    pub manifold: ManifoldKind,
    pub lambda: f64,
    /// Frequency cutoff on the unit surface.
    pub cutoff: f64,
    pub data_decay: f64,
    pub data_mass: f64,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
    pub s: Option<f64>,
    pub n: Option<f64>,
    /// Allowed `|mass(T) − mass(0)| / mass(0)`.
    pub mass_tolerance: f64,
    pub seed: u64,
}

impl EvolveSpec {
    pub fn resolve(src: &ConfigSource) -> Result<Self> {
        src.check_for(Experiment::Evolve)?;
        let c = &src.config;
        let (s, n) = match (c.s, c.n) {
            (Some(_), Some(n)) => (Some(regularity(src, 1.0)?), Some(src.positive("n", Some(n), 1.0)?)),
            (None, None) => (None, None),
            (Some(_), None) => return Err(src.error("s", "needs n as well")),
            (None, Some(_)) => return Err(src.error("n", "needs s as well")),
        };
        let lambda = match c.lambda {
            None => 1.0,
            Some(LambdaRule::Explicit(l)) => src.positive("lambda", Some(l), 1.0)?,
            Some(_) => match (s, n) {
                (Some(s), Some(n)) if s > 2.0 / 3.0 && s < 1.0 => n.powf((1.0 - s) / s),
                _ => return Err(src.error("lambda", "auto needs n and s in (2/3, 1)")),
            },
        };
        let scheme = parse_key(src, "scheme", &c.scheme, Scheme::SplitStepStrang)?;
        let record_every = c.record_every.unwrap_or(10);
        if record_every == 0 {
            return Err(src.error("record_every", "must be at least 1"));
        }
        Ok(EvolveSpec {
            manifold: c.manifold.unwrap_or(ManifoldKind::Torus),
            lambda,
            cutoff: src.positive("cutoff", c.cutoff, 24.0)?,
            data_decay: src.positive("data_decay", c.data_decay, 4.0)?,
            data_mass: src.positive("data_mass", c.data_mass, 1.0)?,
            scheme,
            dt: src.positive("dt", c.dt, 1e-3)?,
            t_final: src.positive("t_final", c.t_final, 1.0)?,
            record_every,
            s,
            n,
            mass_tolerance: src.positive(
                "mass_tolerance",
                c.mass_tolerance,
                if scheme == Scheme::SplitStepStrang { 1e-10 } else { 1e-6 },
            )?,
            seed: src.seed(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub modified_energy: f64,
    pub h_s_norm: f64,
}

pub fn run_evolve(spec: &EvolveSpec) -> Result<RunOutput> {
    let base = SpectralBasis::new(spec.manifold, spec.cutoff, 1.0)?;
    let u0 = rescale_data(&smooth_random_data(&base, spec.data_decay, spec.data_mass, spec.seed)?, spec.lambda)?;
    let mut cfg = EvolveConfig::new(spec.dt, spec.t_final, spec.scheme).with_record_every(spec.record_every);
    if let (Some(s), Some(n)) = (spec.s, spec.n) {
        cfg = cfg.with_multiplier(IMultiplier::new(n, s)?);
    }
    let traj = evolve(&u0, &cfg)?;
    let rows: Vec<TrajectoryRow> = traj
        .times
        .iter()
        .zip(&traj.reports)
        .zip(&traj.energies)
        .map(|((&t, r), &e)| TrajectoryRow {
            t,
            mass: r.mass,
            energy: e,
            modified_energy: r.modified_energy,
            h_s_norm: r.h_s_norm,
        })
        .collect();
    let m0 = rows[0].mass;
    let e0 = rows[0].energy;
    let mass_drift = rows.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max) / m0;
    let energy_drift = rows.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max);

    let mut out = RunOutput::default();
    out.table("trajectory.csv", &rows)?;
    out.bases.push(u0.basis().descriptor());
    out.result("steps", cfg.step_count());
    out.result("relative_mass_drift", mass_drift);
    out.result("energy_drift", energy_drift);
    out.result("energy_0", e0);
    out.check(
        "mass-conservation",
        mass_drift <= spec.mass_tolerance,
        format!("relative drift {mass_drift:.3e} (tolerance {:.1e})", spec.mass_tolerance),
    );
    Ok(out)
}

// --------------------------------------------------- almost-conservation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostConservationSpec {
    pub s: f64,
    pub n_list: Vec<f64>,
    pub lambda: LambdaRule,
    pub delta: f64,
    /// Frequency cutoff on the unit surface, shared by every `N`.
    pub cutoff: f64,
    pub data_decay: f64,
    pub data_mass: f64,
    /// Time steps per local interval `[0, δ]`.
    pub steps: usize,
    pub record_every: usize,
    pub scheme: Scheme,
    pub max_slope: f64,
    pub seed: u64,
    pub workers: usize,
}

impl AlmostConservationSpec {
    pub fn resolve(src: &ConfigSource) -> Result<Self> {
        src.check_for(Experiment::AlmostConservation)?;
        let c = &src.config;
        let s = regularity(src, 0.7)?;
        let lambda = c.lambda.unwrap_or(LambdaRule::AUTO);
        match lambda {
            LambdaRule::Explicit(l) => {
                src.positive("lambda", Some(l), 1.0)?;
            }
            _ if !(s > 2.0 / 3.0 && s < 1.0) => {
                return Err(src.error("lambda", format!("auto needs s in (2/3, 1), got {s}")));
            }
            _ => {}
        }
        let n_list = src.nonempty("n_list", &c.n_list, &[4.0, 8.0, 16.0, 32.0])?;
        if let Some(bad) = n_list.iter().find(|&&n| !(n >= 2.0 && n.is_finite())) {
            return Err(src.error("n_list", format!("every N must be at least 2, got {bad}")));
        }
        let steps = c.steps.unwrap_or(1600);
        let record_every = c.record_every.unwrap_or(10);
        if steps == 0 || record_every == 0 {
            return Err(src.error(if steps == 0 { "steps" } else { "record_every" }, "must be at least 1"));
        }
        Ok(AlmostConservationSpec {
            s,
            n_list,
            lambda,
            delta: src.positive("delta", c.delta, DEFAULT_DELTA)?,
            cutoff: src.positive("cutoff", c.cutoff, 160.0)?,
            data_decay: src.positive("data_decay", c.data_decay, 2.0)?,
            data_mass: src.positive("data_mass", c.data_mass, 1.0)?,
            steps,
            record_every,
            scheme: Scheme::SplitStepStrang,
            max_slope: c.max_slope.unwrap_or(-0.3),
            seed: src.seed(),
            workers: src.workers()?,
        })
    }

    pub fn lambda_for(&self, n: f64) -> f64 {
        match self.lambda {
            LambdaRule::Explicit(l) => l,
            _ => n.powf((1.0 - self.s) / self.s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementRow {
    #[serde(rename = "N")]
    pub n: f64,
    pub lambda: f64,
    pub delta: f64,
    pub steps: usize,
    /// Local intervals needed to reach the horizon of the scaling plan.
    pub iterations: u64,
    /// Horizon on the unit surface reached by those intervals.
    pub t_horizon: f64,
    pub modified_energy_0: f64,
    /// `sup_{t ≤ δ} |Ẽ(t) − Ẽ(0)|`.
    pub increment: f64,
    /// `sup_{t ≤ δ} |E(t) − E(0)|`; zero for the exact Galerkin flow, so it
    /// measures time-discretization error.
    pub hamiltonian_drift: f64,
    /// `1/(λ N^{1/2})`.
    pub reference: f64,
}

pub fn run_almost_conservation(spec: &AlmostConservationSpec) -> Result<RunOutput> {
    let base = SpectralBasis::new(ManifoldKind::Torus, spec.cutoff, 1.0)?;
    let u0 = smooth_random_data(&base, spec.data_decay, spec.data_mass, spec.seed)?;
    let rows = run_pool(spec.workers, spec.n_list.len(), |i| {
        let n = spec.n_list[i];
        let lambda = spec.lambda_for(n);
        let ul = rescale_data(&u0, lambda)?;
        let mult = IMultiplier::new(n, spec.s)?;
        let cfg = EvolveConfig::new(spec.delta / spec.steps as f64, spec.delta, spec.scheme)
            .with_multiplier(mult)
            .with_record_every(spec.record_every);
        let traj = evolve(&ul, &cfg)?;
        let e0 = traj.reports[0].modified_energy;
        let h0 = traj.energies[0];
        let (iterations, t_horizon) = match scaling_plan(n, spec.s, spec.delta) {
            Ok(p) => (p.iterations, p.t_final),
            Err(_) => (0, 0.0),
        };
        Ok(IncrementRow {
            n,
            lambda,
            delta: spec.delta,
            steps: cfg.step_count(),
            iterations,
            t_horizon,
            modified_energy_0: e0,
            increment: traj.reports.iter().map(|r| (r.modified_energy - e0).abs()).fold(0.0, f64::max),
            hamiltonian_drift: traj.energies.iter().map(|e| (e - h0).abs()).fold(0.0, f64::max),
            reference: 1.0 / (lambda * n.sqrt()),
        })
    })?;

    let mut out = RunOutput::default();
    out.table("almost-conservation.csv", &rows)?;
    out.bases.push(base.descriptor());
    let theory = -0.5 - (1.0 - spec.s) / spec.s;
    out.result("theory_slope", theory);
    if rows.len() >= 2 {
        let slope = log_log_slope(&rows.iter().map(|r| (r.n, r.increment)).collect::<Vec<_>>());
        out.result("fitted_slope", slope);
        out.check(
            "increment-slope",
            slope <= spec.max_slope,
            format!("fitted slope {slope:.3} (limit {}, theory {theory:.3})", spec.max_slope),
        );
    } else {
        out.check("increment-slope", true, "single N, no slope fitted");
    }
    let unresolved: Vec<f64> = rows.iter().filter(|r| r.increment <= r.hamiltonian_drift).map(|r| r.n).collect();
    out.result("unresolved_n", &unresolved);
    Ok(out)
}

// ------------------------------------------------------------- strichartz

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzSpec {
    pub sweep: SweepConfig,
    /// Allowed ratio between the largest-`N₁` and smallest-`N₁` max ratios.
    pub max_ratio_factor: f64,
}

impl StrichartzSpec {
    pub fn resolve(src: &ConfigSource) -> Result<Self> {
        src.check_for(Experiment::Strichartz)?;
        let c = &src.config;
        let lambda = match c.lambda {
            None => 1.0,
            Some(LambdaRule::Explicit(l)) => src.positive("lambda", Some(l), 1.0)?,
            Some(_) => return Err(src.error("lambda", "auto is not defined for this experiment")),
        };
        let n1_list = src.nonempty("n1_list", &c.n1_list, &[8, 16, 32, 64])?;
        let n2 = c.n2.unwrap_or(4);
        if n2 == 0 || n1_list.iter().any(|&n1| n1 < n2) {
            return Err(src.error("n2", format!("must be positive and at most every N1, got {n2}")));
        }
        let trials = c.trials.unwrap_or(20);
        if trials == 0 {
            return Err(src.error("trials", "must be at least 1"));
        }
        let regime = match c.regime.as_deref() {
            None | Some("semiclassical") => SweepRegime::Semiclassical,
            Some("rescaled") => SweepRegime::Rescaled,
            Some(other) => {
                return Err(src.error("regime", format!("expected semiclassical or rescaled, got {other:?}")))
            }
        };
        Ok(StrichartzSpec {
            sweep: SweepConfig {
                manifold: c.manifold.unwrap_or(ManifoldKind::Torus),
                n1_list,
                n2,
                lambda,
                trials,
                seed: src.seed(),
                regime,
                low_frequency_ball: c.low_frequency_ball.unwrap_or(false),
                workers: src.workers()?,
            },
            max_ratio_factor: src.positive("max_ratio_factor", c.max_ratio_factor, 2.0)?,
        })
    }
}

pub fn run_strichartz(spec: &StrichartzSpec) -> Result<RunOutput> {
    let samples = strichartz_sweep(&spec.sweep)?;
    let max_ratio = |n1: u64| {
        samples
            .iter()
            .filter(|s| s.n1 == n1)
            .map(|s| s.ratio)
            .fold(0.0, f64::max)
    };
    let lo = *spec.sweep.n1_list.iter().min().unwrap();
    let hi = *spec.sweep.n1_list.iter().max().unwrap();
    let (r_lo, r_hi) = (max_ratio(lo), max_ratio(hi));
    let factor = r_hi / r_lo;
    let mut out = RunOutput::default();
    out.table("strichartz.csv", &samples)?;
    let per_n1: Vec<(u64, f64)> = spec.sweep.n1_list.iter().map(|&n| (n, max_ratio(n))).collect();
    out.result("max_ratio_by_n1", per_n1);
    out.check(
        "uniform-constant",
        factor <= spec.max_ratio_factor && factor >= 1.0 / spec.max_ratio_factor,
        format!("max ratio {r_hi:.4} at N1={hi} vs {r_lo:.4} at N1={lo} (factor {factor:.3})"),
    );
    Ok(out)
}

// --------------------------------------------------------------- locality

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalitySpec {
    pub lambda_cluster: f64,
    pub mu_cluster: f64,
    pub k_list: Vec<f64>,
    pub trials: usize,
    /// Random off-resonant torus quadruples.
    pub quadruples: usize,
    /// Lattice radius for the torus quadruples.
    pub cutoff: f64,
    /// Bound on sphere cluster norms beyond the degree sum.
    pub zero_tolerance: f64,
    /// Bound on off-resonant torus correlations.
    pub torus_zero_tolerance: f64,
    pub seed: u64,
}

impl LocalitySpec {
    pub fn resolve(src: &ConfigSource) -> Result<Self> {
        src.check_for(Experiment::Locality)?;
        let c = &src.config;
        Ok(LocalitySpec {
            lambda_cluster: src.positive("lambda_cluster", c.lambda_cluster, 20.0)?,
            mu_cluster: src.positive("mu_cluster", c.mu_cluster, 5.0)?,
            k_list: src.nonempty("k_list", &c.k_list, &[1.0, 2.0, 3.0])?,
            trials: c.trials.unwrap_or(3),
            quadruples: c.quadruples.unwrap_or(1000),
            cutoff: src.positive("cutoff", c.cutoff, 10.0)?,
            zero_tolerance: src.positive("zero_tolerance", c.zero_tolerance, 1e-10)?,
            torus_zero_tolerance: 1e-13,
            seed: src.seed(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleRow {
    pub index: usize,
    pub xi: [[i32; 2]; 4],
    pub value: f64,
}

/// Random lattice points in the disk of radius `r`.
fn lattice_point<R: Rng + ?Sized>(rng: &mut R, r: i32) -> [i32; 2] {
    loop {
        let p = [rng.random_range(-r..=r), rng.random_range(-r..=r)];
        if p[0] * p[0] + p[1] * p[1] <= r * r {
            return p;
        }
    }
}

/// `|∫ e_{ξ₁} e_{ξ₂} e_{ξ₃} e_{ξ₄}|` for random quadruples with `Σξ ≠ 0`.
pub fn off_resonant_quadruples(count: usize, radius: f64, seed: u64) -> Result<Vec<QuadrupleRow>> {
    let r = radius.floor() as i32;
    let basis = SpectralBasis::new(ManifoldKind::Torus, radius.max(1.0), 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(count);
    while rows.len() < count {
        let xi = [(); 4].map(|_| lattice_point(&mut rng, r));
        if xi.iter().map(|x| x[0]).sum::<i32>() == 0 && xi.iter().map(|x| x[1]).sum::<i32>() == 0 {
            continue;
        }
        let e = xi
            .iter()
            .map(|&x| SpectralCoeffs::single_mode(Arc::clone(&basis), ModeLabel::Lattice(x[0], x[1]), Complex64::new(1.0, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        let v = correlation_integral(&[
            Factor::Plain(&e[0]),
            Factor::Plain(&e[1]),
            Factor::Plain(&e[2]),
            Factor::Plain(&e[3]),
        ])?;
        rows.push(QuadrupleRow {
            index: rows.len(),
            xi,
            value: v.norm(),
        });
    }
    Ok(rows)
}

pub fn run_locality(spec: &LocalitySpec) -> Result<RunOutput> {
    let rows = cluster_decay_table(spec.lambda_cluster, spec.mu_cluster, &spec.k_list, spec.trials, spec.seed)?;
    // Products of degree-l₂ and degree-l₃ harmonics stop at degree l₂ + l₃,
    // i.e. frequency below λ + μ + 2 for clusters of width one.
    let beyond = spec.lambda_cluster + spec.mu_cluster + 2.0;
    let sphere_max = rows
        .iter()
        .filter(|r| r.nu >= beyond)
        .map(|r| r.ratio)
        .fold(0.0, f64::max);
    let quads = off_resonant_quadruples(spec.quadruples, spec.cutoff, spec.seed)?;
    let torus_max = quads.iter().map(|q| q.value).fold(0.0, f64::max);

    let mut out = RunOutput::default();
    out.table("locality.csv", &rows)?;
    out.result("sphere_beyond_degree_sum_max", sphere_max);
    out.result("torus_off_resonance_max", torus_max);
    out.check(
        "sphere-degree-sum",
        sphere_max <= spec.zero_tolerance,
        format!("max normalized cluster norm beyond nu = {beyond}: {sphere_max:.3e}"),
    );
    out.check(
        "torus-off-resonance",
        torus_max <= spec.torus_zero_tolerance,
        format!("max |A_0| over {} off-resonant quadruples: {torus_max:.3e}", quads.len()),
    );
    Ok(out)
}

// ------------------------------------------------------------ an-identity

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnIdentitySpec {
    pub quadruples: usize,
    pub n_max: u32,
    /// Lattice radius for `ξ₂, ξ₃, ξ₄`.
    pub cutoff: f64,
    pub lambda: f64,
    pub max_error: f64,
    pub seed: u64,
}

impl AnIdentitySpec {
    pub fn resolve(src: &ConfigSource) -> Result<Self> {
        src.check_for(Experiment::AnIdentity)?;
        let c = &src.config;
        let lambda = match c.lambda {
            None => 1.0,
            Some(LambdaRule::Explicit(l)) => src.positive("lambda", Some(l), 1.0)?,
            Some(_) => return Err(src.error("lambda", "auto is not defined for this experiment")),
        };
        let n_max = c.n_max.unwrap_or(2);
        if !(1..=4).contains(&n_max) {
            return Err(src.error("n_max", format!("must lie in 1..=4, got {n_max}")));
        }
        Ok(AnIdentitySpec {
            quadruples: c.quadruples.unwrap_or(100),
            n_max,
            cutoff: src.positive("cutoff", c.cutoff, 6.0)?,
            lambda,
            max_error: src.positive("max_error", c.max_error, 1e-10)?,
            seed: src.seed(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnRow {
    pub quadruple: usize,
    pub xi1_x: i32,
    pub xi1_y: i32,
    pub xi2_x: i32,
    pub xi2_y: i32,
    pub xi3_x: i32,
    pub xi3_y: i32,
    pub xi4_x: i32,
    pub xi4_y: i32,
    pub denominator: f64,
    pub n: u32,
    pub a0_re: f64,
    pub a0_im: f64,
    pub a0_from_an_re: f64,
    pub a0_from_an_im: f64,
    pub relative_error: f64,
}

/// Resonant quadruples `ξ₁ = −(ξ₂ + ξ₃ + ξ₄)` with `|n₁² − n₂² − n₃² − n₄²| ≥ 1`.
pub fn resonant_quadruples(count: usize, radius: f64, seed: u64) -> Vec<[[i32; 2]; 4]> {
    let r = radius.floor().max(1.0) as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let [a, b, c] = [(); 3].map(|_| lattice_point(&mut rng, r));
        let xi1 = [-(a[0] + b[0] + c[0]), -(a[1] + b[1] + c[1])];
        let sq = |x: [i32; 2]| x[0] * x[0] + x[1] * x[1];
        if (sq(xi1) - sq(a) - sq(b) - sq(c)).abs() >= 1 {
            out.push([xi1, a, b, c]);
        }
    }
    out
}

pub fn run_an_identity(spec: &AnIdentitySpec) -> Result<RunOutput> {
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, q) in resonant_quadruples(spec.quadruples, spec.cutoff, spec.seed).into_iter().enumerate() {
        let rep = an_identity_check(q[0], q[1], q[2], q[3], spec.n_max, spec.lambda)?;
        for level in &rep.levels {
            worst = worst.max(level.relative_error);
            rows.push(AnRow {
                quadruple: i,
                xi1_x: q[0][0],
                xi1_y: q[0][1],
                xi2_x: q[1][0],
                xi2_y: q[1][1],
                xi3_x: q[2][0],
                xi3_y: q[2][1],
                xi4_x: q[3][0],
                xi4_y: q[3][1],
                denominator: rep.denominator,
                n: level.n,
                a0_re: rep.a0[0],
                a0_im: rep.a0[1],
                a0_from_an_re: level.a0_from_an[0],
                a0_from_an_im: level.a0_from_an[1],
                relative_error: level.relative_error,
            });
        }
    }
    let mut out = RunOutput::default();
    out.table("an-identity.csv", &rows)?;
    out.result("max_relative_error", worst);
    out.check(
        "an-identity",
        worst <= spec.max_error,
        format!("max relative error {worst:.3e} over {} quadruples, n <= {}", spec.quadruples, spec.n_max),
    );
    Ok(out)
}

// -------------------------------------------------------------- tensorize

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorizeSpec {
    pub block: ResonantBlock,
    pub options: TensorizeOptions,
}

impl TensorizeSpec {
    pub fn resolve(src: &ConfigSource) -> Result<Self> {
        src.check_for(Experiment::Tensorize)?;
        let c = &src.config;
        let s = regularity(src, 0.7)?;
        let mode_cap = c.mode_cap.unwrap_or(9);
        if mode_cap % 2 == 0 {
            return Err(src.error("mode_cap", format!("must be odd, got {mode_cap}")));
        }
        let defaults = TensorizeOptions::default();
        let extension = parse_key(src, "extension", &c.extension, Extension::PeriodicBlend)?;
        Ok(TensorizeSpec {
            block: ResonantBlock {
                n_cut: src.positive("n", c.n, 16.0)?,
                s,
                l: c.l.unwrap_or(3),
                n2: src.positive("block_n2", c.block_n2, 64.0)?,
                n3: src.positive("block_n3", c.block_n3, 2.0)?,
                n4: src.positive("block_n4", c.block_n4, 1.0)?,
                alpha: c.alpha.unwrap_or(10.0),
                beta: c.beta.unwrap_or(0.0),
            },
            options: TensorizeOptions {
                mode_cap,
                held_out: c.held_out.unwrap_or(defaults.held_out),
                tolerance: src.positive("tolerance", c.tolerance, defaults.tolerance)?,
                extension,
                ..defaults
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub j1: i64,
    pub j2: i64,
    pub j3: i64,
    pub j4: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub alpha: String,
    pub max_scaled: f64,
}

pub fn run_tensorize(spec: &TensorizeSpec) -> Result<RunOutput> {
    let block = spec.block.block()?;
    let e = tensorize(&block, &spec.options)?;
    let jm = e.half_width();
    let mc = e.mode_cap;
    let coeffs: Vec<CoefficientRow> = e
        .coefficients
        .iter()
        .enumerate()
        .map(|(flat, c)| {
            let j = |d: u32| (flat / mc.pow(3 - d)) as i64 % mc as i64 - jm;
            CoefficientRow {
                j1: j(0),
                j2: j(1),
                j3: j(2),
                j4: j(3),
                re: c.re,
                im: c.im,
            }
        })
        .collect();
    let estimates: Vec<EstimateRow> = symbol_estimate_check(&block, 2, 5)?
        .into_iter()
        .map(|b| EstimateRow {
            alpha: b.alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(""),
            max_scaled: b.max_scaled,
        })
        .collect();
    let mut out = RunOutput::default();
    out.table("coefficients.csv", &coeffs)?;
    out.table("symbol-estimates.csv", &estimates)?;
    out.result("expansion", e.summary());
    out.result("symbol_sup", e.symbol_sup);
    out.check(
        "reconstruction",
        e.converged,
        format!(
            "sup error {:.3e} (relative {:.3e}) with {} modes per axis, tolerance {:.1e}",
            e.sup_error, e.relative_sup_error, e.mode_cap, e.tolerance
        ),
    );
    Ok(out)
}

// --------------------------------------------------------------- dispatch

/// Resolves and runs one experiment; returns the resolved spec as JSON.
pub fn run(experiment: Experiment, src: &ConfigSource) -> Result<(serde_json::Value, RunOutput)> {
    fn pack<T: Serialize>(spec: &T, out: Result<RunOutput>) -> Result<(serde_json::Value, RunOutput)> {
        Ok((serde_json::to_value(spec).expect("spec serializes"), out?))
    }
    match experiment {
        Experiment::Evolve => {
            let spec = EvolveSpec::resolve(src)?;
            pack(&spec, run_evolve(&spec))
        }
        Experiment::AlmostConservation => {
            let spec = AlmostConservationSpec::resolve(src)?;
            pack(&spec, run_almost_conservation(&spec))
        }
        Experiment::Strichartz => {
            let spec = StrichartzSpec::resolve(src)?;
            pack(&spec, run_strichartz(&spec))
        }
        Experiment::Locality => {
            let spec = LocalitySpec::resolve(src)?;
            pack(&spec, run_locality(&spec))
        }
        Experiment::AnIdentity => {
            let spec = AnIdentitySpec::resolve(src)?;
            pack(&spec, run_an_identity(&spec))
        }
        Experiment::Tensorize => {
            let spec = TensorizeSpec::resolve(src)?;
            pack(&spec, run_tensorize(&spec))
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub output: RunOutput,
}

/// Runs an experiment and writes its artifacts.
pub fn execute(experiment: Experiment, src: &ConfigSource) -> Result<RunReport> {
    let (resolved, output) = run(experiment, src)?;
    let dir = src.output_dir(experiment);
    let files = write_run(&dir, experiment.name(), &resolved, src.seed(), &output)?;
    Ok(RunReport { dir, files, output })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(-0.8))).collect();
        assert!((log_log_slope(&pts) + 0.8).abs() < 1e-12);
    }

    #[test]
    fn smooth_data_has_requested_mass() {
        let b = SpectralBasis::new(ManifoldKind::Sphere, 6.0, 1.0).unwrap();
        let c = smooth_random_data(&b, 3.0, 2.5, 7).unwrap();
        assert!((c.mass() - 2.5).abs() < 1e-12);
        assert_eq!(c.values(), smooth_random_data(&b, 3.0, 2.5, 7).unwrap().values());
    }

    #[test]
    fn resonant_quadruples_sum_to_zero() {
        for q in resonant_quadruples(20, 4.0, 3) {
            assert_eq!(q.iter().map(|x| x[0]).sum::<i32>(), 0);
            assert_eq!(q.iter().map(|x| x[1]).sum::<i32>(), 0);
        }
    }

    #[test]
    fn empty_sweep_is_config_error() {
        let src = ConfigSource::parse("n_list = []\n", None).unwrap();
        let err = AlmostConservationSpec::resolve(&src).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn small_evolve_run() {
        let src = ConfigSource::parse("cutoff = 6.0\nt_final = 0.05\ndt = 0.01\n", None).unwrap();
        let (_, out) = run(Experiment::Evolve, &src).unwrap();
        assert!(out.passed());
        assert_eq!(out.tables[0].0, "trajectory.csv");
        assert!(out.tables[0].1.starts_with("t,mass,energy,modified_energy,h_s_norm\n"));
    }
}
