//! Spectral localization of eigenfunction products.
//!
//! On the round sphere a product of harmonics of degrees `k` and `l` has no
//! component above degree `k + l`; on the flat torus a product of characters
//! is a single character. This module measures both facts, tabulates the
//! cluster profiles of random products, and checks the identity relating the
//! quadruple correlation `A₀ = ∫ e₁e₂e₃e₄` to the iterated derivative
//! contractions `A_n` on the flat torus.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{project_interval, ManifoldKind, ModeLabel, SpectralBasis, SpectralCoeffs};
use crate::strichartz::random_localized;
use crate::transform::{
    correlation_integral, pointwise_product, product_field, Factor, QuadratureGrid,
};

/// Cluster projection `P_{[ν, ν+1)}`.
pub fn cluster_projection(c: &SpectralCoeffs, nu: f64) -> Result<SpectralCoeffs> {
    project_interval(c, nu.max(0.0), nu + 1.0)
}

fn cluster_is_empty(basis: &SpectralBasis, a: f64) -> bool {
    !basis
        .modes()
        .iter()
        .any(|m| m.frequency >= a && m.frequency <= a + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub nu: f64,
    /// `K = (ν − λ − 2)/μ`.
    pub k: f64,
    pub norm: f64,
    /// `norm / (μ^{1/2} ‖f‖ ‖g‖)`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityProfile {
    pub manifold: ManifoldKind,
    pub lambda_cluster: f64,
    pub mu_cluster: f64,
    pub f_norm: f64,
    pub g_norm: f64,
    /// `Λ(2, μ) = μ^{1/2}`.
    pub prefactor: f64,
    pub entries: Vec<ProfileEntry>,
    /// Set when a factor cluster holds no eigenvalue.
    pub empty_clusters: Vec<String>,
}

fn product_basis(
    f: &SpectralCoeffs,
    g: &SpectralCoeffs,
    max_frequency: f64,
) -> Result<Arc<SpectralBasis>> {
    let b = f.basis();
    SpectralBasis::new(b.manifold(), max_frequency.max(1.0), b.scale())
        .and_then(|basis| {
            if basis.same_surface(g.basis()) {
                Ok(basis)
            } else {
                Err(Error::Mismatch("factors live on different surfaces".into()))
            }
        })
}

/// `‖P_{[ν,ν+1)}(fg)‖_{L²}` for each target `ν`, together with `K` and the
/// prefactor `μ^{1/2}`. `f` and `g` should be localized to `[λ, λ+1]` and
/// `[μ, μ+1]`.
pub fn product_localization_profile(
    f: &SpectralCoeffs,
    g: &SpectralCoeffs,
    lambda_cluster: f64,
    mu_cluster: f64,
    targets: &[f64],
) -> Result<LocalityProfile> {
    if mu_cluster <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cluster frequency mu must be positive, got {mu_cluster}"
        )));
    }
    let mut empty_clusters = Vec::new();
    if cluster_is_empty(f.basis(), lambda_cluster) {
        empty_clusters.push(format!("[{lambda_cluster}, {}]", lambda_cluster + 1.0));
    }
    if cluster_is_empty(g.basis(), mu_cluster) {
        empty_clusters.push(format!("[{mu_cluster}, {}]", mu_cluster + 1.0));
    }
    let top = targets.iter().cloned().fold(0.0, f64::max) + 1.0;
    let target = product_basis(f, g, top)?;
    let product = pointwise_product(&[Factor::Plain(f), Factor::Plain(g)], &target)?;
    let (f_norm, g_norm) = (f.l2_norm(), g.l2_norm());
    let prefactor = mu_cluster.sqrt();
    let entries = targets
        .iter()
        .map(|&nu| {
            let norm = cluster_projection(&product, nu)?.l2_norm();
            let denom = prefactor * f_norm * g_norm;
            Ok(ProfileEntry {
                nu,
                k: (nu - lambda_cluster - 2.0) / mu_cluster,
                norm,
                normalized: if denom > 0.0 { norm / denom } else { 0.0 },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalityProfile {
        manifold: f.basis().manifold(),
        lambda_cluster,
        mu_cluster,
        f_norm,
        g_norm,
        prefactor,
        entries,
        empty_clusters,
    })
}

/// `Σ_ν ‖P_{[ν,ν+1)}(fg)‖²` over all unit clusters, and `‖fg‖²` by direct
/// quadrature.
pub fn product_parseval(f: &SpectralCoeffs, g: &SpectralCoeffs) -> Result<(f64, f64)> {
    let top = f.support_max_frequency() + g.support_max_frequency() + 2.0;
    let target = product_basis(f, g, top)?;
    let product = pointwise_product(&[Factor::Plain(f), Factor::Plain(g)], &target)?;
    let mut clusters = 0.0;
    let mut nu = 0.0;
    while nu <= top {
        clusters += cluster_projection(&product, nu)?.mass();
        nu += 1.0;
    }
    let degree = 2 * (f.support_bandwidth() + g.support_bandwidth());
    let b = f.basis();
    let grid = QuadratureGrid::for_degree(b.manifold(), b.scale(), degree)?;
    let direct = product_field(&[Factor::Plain(f), Factor::Plain(g)], &grid)?.integrate_abs_pow(2.0);
    Ok((clusters, direct))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationVerdict {
    pub frequencies: [f64; 4],
    pub integral: [f64; 2],
    /// `n₁ > n₂ + n₃ + n₄ + 2`: the correlation must vanish.
    pub beyond_triangle: bool,
    /// `n₁ > C · max(n₂, n₃, n₄)`.
    pub dominant_frequency: bool,
    /// False only when the correlation was required to vanish but did not.
    pub holds: bool,
}

/// Checks that `∫ e₁e₂e₃e₄` vanishes when `n₁` exceeds `n₂ + n₃ + n₄ + 2`.
///
/// Frequencies are read off the inputs' supports.
pub fn crude_localization_check(
    e: [&SpectralCoeffs; 4],
    c_threshold: f64,
    tolerance: f64,
) -> Result<LocalizationVerdict> {
    let n = e.map(|c| c.support_max_frequency());
    let integral = correlation_integral(&e.map(Factor::Plain))?;
    let beyond_triangle = n[0] > n[1] + n[2] + n[3] + 2.0;
    Ok(LocalizationVerdict {
        frequencies: n,
        integral: [integral.re, integral.im],
        beyond_triangle,
        dominant_frequency: n[0] > c_threshold * n[1].max(n[2]).max(n[3]),
        holds: !beyond_triangle || integral.norm() <= tolerance,
    })
}

/// One contraction pattern of `B_n`: `p23` gradient pairs shared between
/// slots 2 and 3, and so on, with its integer multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BnTerm {
    pub p23: u32,
    pub p24: u32,
    pub p34: u32,
    pub coefficient: u64,
}

/// Expands `B_n` by iterating `B_{k+1} = Σ_{pairs} ∇_α(·) ∇^α(·) B_k` from
/// `B_0 = e₂e₃e₄` and merging equal patterns (derivatives commute on the
/// flat torus).
pub fn bn_terms(n: u32) -> Vec<BnTerm> {
    let mut terms: BTreeMap<(u32, u32, u32), u64> = BTreeMap::new();
    terms.insert((0, 0, 0), 1);
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (&(a, b, c), &coef) in &terms {
            for key in [(a + 1, b, c), (a, b + 1, c), (a, b, c + 1)] {
                *next.entry(key).or_insert(0) += coef;
            }
        }
        terms = next;
    }
    terms
        .into_iter()
        .map(|((p23, p24, p34), coefficient)| BnTerm {
            p23,
            p24,
            p34,
            coefficient,
        })
        .collect()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `∂_x^a ∂_y^b c` on the torus.
fn torus_derivative(c: &SpectralCoeffs, a: u32, b: u32) -> SpectralCoeffs {
    let inv = 1.0 / c.basis().scale();
    let i = Complex64::new(0.0, 1.0);
    c.map_modes(|m, v| match m.label {
        ModeLabel::Lattice(x, y) => {
            v * (i * x as f64 * inv).powu(a) * (i * y as f64 * inv).powu(b)
        }
        ModeLabel::Harmonic { .. } => unreachable!("torus only"),
    })
}

/// `∫ e₁ · T(e₂, e₃, e₄)` for one contraction pattern, summing over the
/// `x`/`y` choices of every contracted index.
fn contracted_integral(
    e: [&SpectralCoeffs; 4],
    term: &BnTerm,
    grid: &Arc<QuadratureGrid>,
) -> Result<Complex64> {
    let e1 = crate::transform::synthesize(e[0], grid)?;
    let mut total = Complex64::new(0.0, 0.0);
    for k23 in 0..=term.p23 {
        for k24 in 0..=term.p24 {
            for k34 in 0..=term.p34 {
                let weight = binomial(term.p23, k23) * binomial(term.p24, k24) * binomial(term.p34, k34);
                let d2 = torus_derivative(e[1], k23 + k24, term.p23 - k23 + term.p24 - k24);
                let d3 = torus_derivative(e[2], k23 + k34, term.p23 - k23 + term.p34 - k34);
                let d4 = torus_derivative(e[3], k24 + k34, term.p24 - k24 + term.p34 - k34);
                let f = product_field(
                    &[Factor::Plain(&d2), Factor::Plain(&d3), Factor::Plain(&d4)],
                    grid,
                )?
                .mul(&e1)?;
                total += f.integrate() * weight;
            }
        }
    }
    Ok(total)
}

/// `A_n = ∫ e₁ B_n(e₂, e₃, e₄)` on the flat torus.
pub fn a_n(e: [&SpectralCoeffs; 4], n: u32) -> Result<Complex64> {
    let basis = e[0].basis();
    if basis.manifold() != ManifoldKind::Torus {
        return Err(Error::Unsupported(
            "the A_n contraction is implemented on the flat torus only".into(),
        ));
    }
    let degree: usize = e.iter().map(|c| c.support_bandwidth()).sum();
    let grid = QuadratureGrid::for_degree(basis.manifold(), basis.scale(), degree)?;
    let mut total = Complex64::new(0.0, 0.0);
    for term in bn_terms(n) {
        total += contracted_integral(e, &term, &grid)? * term.coefficient as f64;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnLevel {
    pub n: u32,
    pub a_n: [f64; 2],
    pub a0_from_an: [f64; 2],
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnIdentityReport {
    pub xi: [[i32; 2]; 4],
    pub a0: [f64; 2],
    /// `n₁² − n₂² − n₃² − n₄²`.
    pub denominator: f64,
    /// Set when `|denominator| < 1`; no levels are evaluated then.
    pub skipped: bool,
    pub levels: Vec<AnLevel>,
}

impl AnIdentityReport {
    pub fn max_relative_error(&self) -> f64 {
        self.levels.iter().map(|l| l.relative_error).fold(0.0, f64::max)
    }
}

fn character(basis: &Arc<SpectralBasis>, xi: [i32; 2]) -> Result<SpectralCoeffs> {
    SpectralCoeffs::single_mode(
        Arc::clone(basis),
        ModeLabel::Lattice(xi[0], xi[1]),
        Complex64::new(1.0, 0.0),
    )
}

/// Checks `A₀ = (−2)ⁿ A_n / (n₁² − n₂² − n₃² − n₄²)ⁿ` for `n = 1..=n_iters`
/// with normalized torus characters; `e₁` is the character at `ξ₁`.
///
/// For a resonant quadruple pass `ξ₁ = −(ξ₂ + ξ₃ + ξ₄)`. Off resonance both
/// sides vanish and the relative error is measured against `1/vol`.
pub fn an_identity_check(
    xi1: [i32; 2],
    e2: [i32; 2],
    e3: [i32; 2],
    e4: [i32; 2],
    n_iters: u32,
    scale: f64,
) -> Result<AnIdentityReport> {
    let xis = [xi1, e2, e3, e4];
    let cutoff = xis
        .iter()
        .map(|x| ((x[0] * x[0] + x[1] * x[1]) as f64).sqrt())
        .fold(1.0, f64::max)
        / scale;
    let basis = SpectralBasis::new(ManifoldKind::Torus, cutoff, scale)?;
    let chars = xis
        .iter()
        .map(|&x| character(&basis, x))
        .collect::<Result<Vec<_>>>()?;
    let e = [&chars[0], &chars[1], &chars[2], &chars[3]];
    let nu = |x: [i32; 2]| (x[0] * x[0] + x[1] * x[1]) as f64 / (scale * scale);
    let denominator = nu(xi1) - nu(e2) - nu(e3) - nu(e4);
    let a0 = correlation_integral(&e.map(Factor::Plain))?;
    let mut report = AnIdentityReport {
        xi: xis,
        a0: [a0.re, a0.im],
        denominator,
        skipped: denominator.abs() < 1.0,
        levels: Vec::new(),
    };
    if report.skipped {
        return Ok(report);
    }
    let floor = 1.0 / (4.0 * PI * PI * scale * scale);
    for n in 1..=n_iters {
        let an = a_n(e, n)?;
        let from = an * (-2.0f64).powi(n as i32) / denominator.powi(n as i32);
        let relative_error = (from - a0).norm() / a0.norm().max(floor);
        report.levels.push(AnLevel {
            n,
            a_n: [an.re, an.im],
            a0_from_an: [from.re, from.im],
            relative_error,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `ν = λ + Kμ + 2`.
    Upper,
    /// `ν = λ − Kμ − 2`.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub manifold: ManifoldKind,
    pub lambda_cluster: f64,
    pub mu_cluster: f64,
    pub nu: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub branch: Branch,
    pub trial: usize,
    pub norm: f64,
    pub prefactor: f64,
    /// `norm / (prefactor ‖f‖ ‖g‖)`.
    pub ratio: f64,
    pub seed: u64,
}

/// Random cluster data on the unit sphere: `f` on `[λ, λ+1]`, `g` on
/// `[μ, μ+1]`, and `‖P_{[ν,ν+1)}(fg)‖ / (μ^{1/2}‖f‖‖g‖)` on both branches
/// for each `K`.
pub fn cluster_decay_table(
    lambda_cluster: f64,
    mu_cluster: f64,
    k_list: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<DecayRow>> {
    let top_nu = k_list
        .iter()
        .map(|k| lambda_cluster + k * mu_cluster + 2.0)
        .fold(lambda_cluster + 1.0, f64::max);
    let basis = SpectralBasis::new(ManifoldKind::Sphere, (lambda_cluster + 1.0).max(mu_cluster + 1.0), 1.0)?;
    let target = SpectralBasis::new(ManifoldKind::Sphere, top_nu + 1.0, 1.0)?;
    let mut rows = Vec::new();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let f = random_localized(&basis, lambda_cluster, lambda_cluster + 1.0, &mut rng)?;
        let g = random_localized(&basis, mu_cluster, mu_cluster + 1.0, &mut rng)?;
        let product = pointwise_product(&[Factor::Plain(&f), Factor::Plain(&g)], &target)?;
        let prefactor = mu_cluster.sqrt();
        let denom = prefactor * f.l2_norm() * g.l2_norm();
        for &k in k_list {
            for branch in [Branch::Upper, Branch::Lower] {
                let nu = match branch {
                    Branch::Upper => lambda_cluster + k * mu_cluster + 2.0,
                    Branch::Lower => lambda_cluster - k * mu_cluster - 2.0,
                };
                if nu < 0.0 {
                    continue;
                }
                let norm = cluster_projection(&product, nu)?.l2_norm();
                rows.push(DecayRow {
                    manifold: ManifoldKind::Sphere,
                    lambda_cluster,
                    mu_cluster,
                    nu,
                    k,
                    branch,
                    trial,
                    norm,
                    prefactor,
                    ratio: norm / denom,
                    seed,
                });
            }
        }
    }
    Ok(rows)
}
