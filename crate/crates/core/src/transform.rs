//! Grid transforms between spectral coefficients and sampled fields.
//!
//! Torus grids are uniform `G × G` tensor grids handled with 2D FFTs. Sphere
//! grids are Gauss–Legendre in `cos θ` times an equispaced longitude ring;
//! synthesis runs the normalized Legendre recurrence per ring followed by a
//! ring FFT. Every grid reports an *exactness degree* `D`: the quadrature is
//! exact for products of eigenfunctions whose per-axis frequencies (torus) or
//! degrees (sphere) add up to at most `D`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::legendre::{gauss_legendre, normalized_legendre, tri_index, tri_len};
use crate::spectra::{same_scale, ManifoldKind, ModeLabel, SpectralBasis, SpectralCoeffs};

/// Default cap on the number of grid nodes any single operation may allocate.
pub const DEFAULT_GRID_BUDGET: usize = 1 << 22;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub enum GridLayout {
    /// `side × side` uniform nodes, row-major in `(x, y)`.
    Torus { side: usize },
    /// `n_theta` colatitude rings (ascending `cos θ`) of `n_phi` nodes each.
    Sphere {
        n_theta: usize,
        n_phi: usize,
        cos_theta: Vec<f64>,
        gl_weights: Vec<f64>,
    },
}

/// Hashable identity of a grid, for caching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridKey {
    pub manifold: ManifoldKind,
    pub scale_bits: u64,
    pub dims: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    manifold: ManifoldKind,
    scale: f64,
    layout: GridLayout,
    weights: Vec<f64>,
    exactness: usize,
}

/// Smallest `n >= min` of the form `2^a 3^b 5^c`.
pub fn fft_friendly(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut r = n;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return n;
        }
        n += 1;
    }
}

impl QuadratureGrid {
    pub fn torus(scale: f64, side: usize) -> Result<Arc<Self>> {
        check_scale(scale)?;
        if side == 0 {
            return Err(Error::InvalidParameter("torus grid side must be positive".into()));
        }
        let h = 2.0 * PI * scale / side as f64;
        Ok(Arc::new(QuadratureGrid {
            manifold: ManifoldKind::Torus,
            scale,
            layout: GridLayout::Torus { side },
            weights: vec![h * h; side * side],
            exactness: side - 1,
        }))
    }

    pub fn sphere(scale: f64, n_theta: usize, n_phi: usize) -> Result<Arc<Self>> {
        check_scale(scale)?;
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidParameter("sphere grid dimensions must be positive".into()));
        }
        let (cos_theta, gl_weights) = gauss_legendre(n_theta);
        let ring = scale * scale * 2.0 * PI / n_phi as f64;
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for w in &gl_weights {
            weights.extend(std::iter::repeat_n(ring * w, n_phi));
        }
        Ok(Arc::new(QuadratureGrid {
            manifold: ManifoldKind::Sphere,
            scale,
            layout: GridLayout::Sphere {
                n_theta,
                n_phi,
                cos_theta,
                gl_weights,
            },
            weights,
            exactness: (2 * n_theta - 1).min(n_phi - 1),
        }))
    }

    /// Smallest FFT-friendly grid exact to degree `degree`.
    pub fn for_degree(manifold: ManifoldKind, scale: f64, degree: usize) -> Result<Arc<Self>> {
        Self::for_degree_with_budget(manifold, scale, degree, DEFAULT_GRID_BUDGET)
    }

    pub fn for_degree_with_budget(
        manifold: ManifoldKind,
        scale: f64,
        degree: usize,
        budget: usize,
    ) -> Result<Arc<Self>> {
        match manifold {
            ManifoldKind::Torus => {
                let side = fft_friendly(degree + 1);
                check_budget(side * side, budget)?;
                Self::torus(scale, side)
            }
            ManifoldKind::Sphere => {
                let n_theta = (degree + 2) / 2;
                let n_phi = fft_friendly(degree + 1);
                check_budget(n_theta * n_phi, budget)?;
                Self::sphere(scale, n_theta, n_phi)
            }
        }
    }

    pub fn manifold(&self) -> ManifoldKind {
        self.manifold
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }

    /// Node coordinates: `(x, y)` on the torus, `(θ, φ)` on the sphere.
    pub fn node(&self, j: usize) -> (f64, f64) {
        match &self.layout {
            GridLayout::Torus { side } => {
                let h = 2.0 * PI * self.scale / *side as f64;
                ((j / side) as f64 * h, (j % side) as f64 * h)
            }
            GridLayout::Sphere {
                n_phi, cos_theta, ..
            } => (
                cos_theta[j / n_phi].acos(),
                2.0 * PI * (j % n_phi) as f64 / *n_phi as f64,
            ),
        }
    }

    pub fn key(&self) -> GridKey {
        let dims = match &self.layout {
            GridLayout::Torus { side } => (*side, *side),
            GridLayout::Sphere { n_theta, n_phi, .. } => (*n_theta, *n_phi),
        };
        GridKey {
            manifold: self.manifold,
            scale_bits: self.scale.to_bits(),
            dims,
        }
    }

    fn matches(&self, basis: &SpectralBasis) -> bool {
        self.manifold == basis.manifold() && same_scale(self.scale, basis.scale())
    }
}

impl fmt::Display for QuadratureGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.layout {
            GridLayout::Torus { side } => write!(f, "torus {side}x{side} (lambda {})", self.scale),
            GridLayout::Sphere { n_theta, n_phi, .. } => {
                write!(f, "sphere {n_theta}x{n_phi} (lambda {})", self.scale)
            }
        }
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale.is_finite() && scale > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")))
    }
}

fn check_budget(required: usize, budget: usize) -> Result<()> {
    if required > budget {
        Err(Error::GridBudgetExceeded { required, budget })
    } else {
        Ok(())
    }
}

/// Complex samples of a field on the nodes of a grid.
#[derive(Debug, Clone)]
pub struct GridField {
    grid: Arc<QuadratureGrid>,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn new(grid: Arc<QuadratureGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridField { grid, values })
    }

    pub fn zeros(grid: Arc<QuadratureGrid>) -> Self {
        let n = grid.len();
        GridField {
            grid,
            values: vec![ZERO; n],
        }
    }

    pub fn from_fn(grid: Arc<QuadratureGrid>, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|j| {
                let (a, b) = grid.node(j);
                f(a, b)
            })
            .collect();
        GridField { grid, values }
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// `∫ f` by the grid quadrature.
    pub fn integrate(&self) -> Complex64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v * w)
            .sum()
    }

    /// `∫ |f|^p` by the grid quadrature.
    pub fn integrate_abs_pow(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| w * v.norm().powf(p))
            .sum()
    }

    pub fn conj(&self) -> Self {
        GridField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Pointwise product with another field on the same grid.
    pub fn mul(&self, other: &GridField) -> Result<Self> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.key() != other.grid.key() {
            return Err(Error::Mismatch("fields sampled on different grids".into()));
        }
        Ok(GridField {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }
}

enum Plan {
    Torus {
        side: usize,
        fwd: Arc<dyn Fft<f64>>,
        inv: Arc<dyn Fft<f64>>,
        bins: Vec<usize>,
    },
    Sphere {
        n_theta: usize,
        n_phi: usize,
        lmax: usize,
        fwd: Arc<dyn Fft<f64>>,
        inv: Arc<dyn Fft<f64>>,
        /// `n_theta × tri_len(lmax)` table of `P̄_l^m(cos θ_i)`.
        legendre: Vec<f64>,
        /// Per mode: packed Legendre index, longitude bin, sign for `m < 0`.
        entries: Vec<(usize, usize, f64)>,
    },
}

/// Synthesis/analysis pair for one basis on one grid, with cached FFT plans
/// and Legendre tables.
pub struct SpectralTransform {
    basis: Arc<SpectralBasis>,
    grid: Arc<QuadratureGrid>,
    plan: Plan,
}

impl fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralTransform")
            .field("modes", &self.basis.len())
            .field("grid", &self.grid.to_string())
            .finish()
    }
}

impl SpectralTransform {
    pub fn new(basis: Arc<SpectralBasis>, grid: Arc<QuadratureGrid>) -> Result<Self> {
        if !grid.matches(&basis) {
            return Err(Error::Mismatch(format!(
                "grid ({grid}) and basis ({} at lambda {}) describe different surfaces",
                basis.manifold(),
                basis.scale()
            )));
        }
        let mut planner = FftPlanner::new();
        let plan = match grid.layout() {
            GridLayout::Torus { side } => {
                let side = *side;
                let bins = basis
                    .modes()
                    .iter()
                    .map(|m| match m.label {
                        ModeLabel::Lattice(x, y) => {
                            let a = (x as i64).rem_euclid(side as i64) as usize;
                            let b = (y as i64).rem_euclid(side as i64) as usize;
                            a * side + b
                        }
                        ModeLabel::Harmonic { .. } => unreachable!("torus basis"),
                    })
                    .collect();
                Plan::Torus {
                    side,
                    fwd: planner.plan_fft_forward(side),
                    inv: planner.plan_fft_inverse(side),
                    bins,
                }
            }
            GridLayout::Sphere {
                n_theta,
                n_phi,
                cos_theta,
                ..
            } => {
                let lmax = basis.bandwidth();
                let width = tri_len(lmax);
                let mut legendre = vec![0.0; n_theta * width];
                for (i, &x) in cos_theta.iter().enumerate() {
                    normalized_legendre(lmax, x, &mut legendre[i * width..(i + 1) * width]);
                }
                let entries = basis
                    .modes()
                    .iter()
                    .map(|mode| match mode.label {
                        ModeLabel::Harmonic { l, m } => {
                            let am = m.unsigned_abs() as usize;
                            let sign = if m < 0 && am % 2 == 1 { -1.0 } else { 1.0 };
                            let bin = (m as i64).rem_euclid(*n_phi as i64) as usize;
                            (tri_index(l as usize, am), bin, sign)
                        }
                        ModeLabel::Lattice(..) => unreachable!("sphere basis"),
                    })
                    .collect();
                Plan::Sphere {
                    n_theta: *n_theta,
                    n_phi: *n_phi,
                    lmax,
                    fwd: planner.plan_fft_forward(*n_phi),
                    inv: planner.plan_fft_inverse(*n_phi),
                    legendre,
                    entries,
                }
            }
        };
        Ok(SpectralTransform { basis, grid, plan })
    }

    /// Transform on the smallest grid for which `analyze` is exact.
    pub fn for_basis(basis: Arc<SpectralBasis>) -> Result<Self> {
        let grid =
            QuadratureGrid::for_degree(basis.manifold(), basis.scale(), 2 * basis.bandwidth())?;
        Self::new(basis, grid)
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    fn check_coeffs(&self, c: &SpectralCoeffs) -> Result<()> {
        let b = c.basis();
        if Arc::ptr_eq(b, &self.basis)
            || (b.same_surface(&self.basis)
                && b.len() == self.basis.len()
                && b.modes().last().map(|m| m.label) == self.basis.modes().last().map(|m| m.label))
        {
            Ok(())
        } else {
            Err(Error::Mismatch(
                "coefficients are not on the transform's basis".into(),
            ))
        }
    }

    /// Point values of `Σ c_k e_k` on the grid nodes.
    pub fn synthesize(&self, c: &SpectralCoeffs) -> Result<GridField> {
        self.check_coeffs(c)?;
        let scale = self.basis.scale();
        let mut values = vec![ZERO; self.grid.len()];
        match &self.plan {
            Plan::Torus { side, inv, bins, .. } => {
                for (&bin, &v) in bins.iter().zip(c.values()) {
                    values[bin] += v;
                }
                fft2(&mut values, *side, inv.as_ref());
                let norm = 1.0 / (2.0 * PI * scale);
                values.iter_mut().for_each(|v| *v *= norm);
            }
            Plan::Sphere {
                n_theta,
                n_phi,
                lmax,
                inv,
                legendre,
                entries,
                ..
            } => {
                let width = tri_len(*lmax);
                let norm = 1.0 / scale;
                for i in 0..*n_theta {
                    let table = &legendre[i * width..(i + 1) * width];
                    let ring = &mut values[i * n_phi..(i + 1) * n_phi];
                    for (&(t, bin, sign), &v) in entries.iter().zip(c.values()) {
                        ring[bin] += v * (table[t] * sign);
                    }
                    inv.process(ring);
                    ring.iter_mut().for_each(|v| *v *= norm);
                }
            }
        }
        Ok(GridField {
            grid: Arc::clone(&self.grid),
            values,
        })
    }

    /// Quadrature coefficients `c_k = Σ_j w_j conj(e_k(x_j)) f(x_j)`.
    ///
    /// Refuses unless the grid is exact for fields in the span of the basis,
    /// i.e. exactness `>= 2 × bandwidth`.
    pub fn analyze(&self, f: &GridField) -> Result<SpectralCoeffs> {
        self.analyze_exact(f, self.basis.bandwidth())
    }

    /// As [`analyze`](Self::analyze) for a field of known bandwidth
    /// `field_degree`; exact when the grid reaches `field_degree + bandwidth`.
    pub fn analyze_exact(&self, f: &GridField, field_degree: usize) -> Result<SpectralCoeffs> {
        let required = field_degree + self.basis.bandwidth();
        if self.grid.exactness() < required {
            return Err(Error::InsufficientExactness {
                required,
                available: self.grid.exactness(),
            });
        }
        self.analyze_truncated(f)
    }

    /// Quadrature projection with no exactness guarantee: components of `f`
    /// beyond the grid's resolution alias onto the result.
    pub fn analyze_truncated(&self, f: &GridField) -> Result<SpectralCoeffs> {
        if !Arc::ptr_eq(f.grid(), &self.grid) && f.grid().key() != self.grid.key() {
            return Err(Error::Mismatch("field sampled on a different grid".into()));
        }
        let scale = self.basis.scale();
        let mut work = f.values().to_vec();
        let mut out = vec![ZERO; self.basis.len()];
        match &self.plan {
            Plan::Torus { side, fwd, bins, .. } => {
                fft2(&mut work, *side, fwd.as_ref());
                let norm = 2.0 * PI * scale / (*side * *side) as f64;
                for (o, &bin) in out.iter_mut().zip(bins) {
                    *o = work[bin] * norm;
                }
            }
            Plan::Sphere {
                n_theta,
                n_phi,
                lmax,
                fwd,
                legendre,
                entries,
                ..
            } => {
                let GridLayout::Sphere { gl_weights, .. } = self.grid.layout() else {
                    unreachable!()
                };
                let width = tri_len(*lmax);
                let ring_norm = scale * 2.0 * PI / *n_phi as f64;
                for i in 0..*n_theta {
                    let table = &legendre[i * width..(i + 1) * width];
                    let ring = &mut work[i * n_phi..(i + 1) * n_phi];
                    fwd.process(ring);
                    let wi = gl_weights[i] * ring_norm;
                    for (o, &(t, bin, sign)) in out.iter_mut().zip(entries) {
                        *o += ring[bin] * (wi * table[t] * sign);
                    }
                }
            }
        }
        SpectralCoeffs::new(Arc::clone(&self.basis), out)
    }
}

/// In-place 2D transform of a row-major `side × side` array.
fn fft2(data: &mut [Complex64], side: usize, fft: &dyn Fft<f64>) {
    fft.process(data);
    transpose(data, side);
    fft.process(data);
    transpose(data, side);
}

fn transpose(data: &mut [Complex64], side: usize) {
    for i in 0..side {
        for j in (i + 1)..side {
            data.swap(i * side + j, j * side + i);
        }
    }
}

/// Point values of `c` on `grid`.
pub fn synthesize(c: &SpectralCoeffs, grid: &Arc<QuadratureGrid>) -> Result<GridField> {
    SpectralTransform::new(Arc::clone(c.basis()), Arc::clone(grid))?.synthesize(c)
}

/// Coefficients of `f` on `basis`, refusing when the grid is not exact.
pub fn analyze(f: &GridField, basis: &Arc<SpectralBasis>) -> Result<SpectralCoeffs> {
    SpectralTransform::new(Arc::clone(basis), Arc::clone(f.grid()))?.analyze(f)
}

/// One input of a multilinear product: a field or its complex conjugate.
#[derive(Debug, Clone, Copy)]
pub enum Factor<'a> {
    Plain(&'a SpectralCoeffs),
    Conj(&'a SpectralCoeffs),
}

impl<'a> Factor<'a> {
    pub fn coeffs(&self) -> &'a SpectralCoeffs {
        match self {
            Factor::Plain(c) | Factor::Conj(c) => c,
        }
    }

    fn degree(&self) -> usize {
        self.coeffs().support_bandwidth()
    }
}

fn check_factors(factors: &[Factor<'_>], reference: &SpectralBasis) -> Result<()> {
    if factors.is_empty() || factors.len() > 4 {
        return Err(Error::InvalidParameter(format!(
            "products take between 1 and 4 factors, got {}",
            factors.len()
        )));
    }
    if factors
        .iter()
        .any(|f| !f.coeffs().basis().same_surface(reference))
    {
        return Err(Error::Mismatch(
            "factors must live on the same surface".into(),
        ));
    }
    Ok(())
}

/// Samples the product of `factors` on `grid`.
pub fn product_field(factors: &[Factor<'_>], grid: &Arc<QuadratureGrid>) -> Result<GridField> {
    let mut acc: Option<GridField> = None;
    for f in factors {
        let mut field = synthesize(f.coeffs(), grid)?;
        if matches!(f, Factor::Conj(_)) {
            field = field.conj();
        }
        acc = Some(match acc {
            None => field,
            Some(a) => a.mul(&field)?,
        });
    }
    acc.ok_or_else(|| Error::InvalidParameter("empty product".into()))
}

/// Alias-free coefficients of `Π factors` on `target`.
pub fn pointwise_product(
    factors: &[Factor<'_>],
    target: &Arc<SpectralBasis>,
) -> Result<SpectralCoeffs> {
    pointwise_product_with_budget(factors, target, DEFAULT_GRID_BUDGET)
}

pub fn pointwise_product_with_budget(
    factors: &[Factor<'_>],
    target: &Arc<SpectralBasis>,
    budget: usize,
) -> Result<SpectralCoeffs> {
    check_factors(factors, target)?;
    let field_degree: usize = factors.iter().map(Factor::degree).sum();
    let grid = QuadratureGrid::for_degree_with_budget(
        target.manifold(),
        target.scale(),
        field_degree + target.bandwidth(),
        budget,
    )?;
    let field = product_field(factors, &grid)?;
    SpectralTransform::new(Arc::clone(target), grid)?.analyze_exact(&field, field_degree)
}

/// `∫_{M_λ} Π f_i` by a quadrature exact for the inputs' total bandwidth.
pub fn correlation_integral(factors: &[Factor<'_>]) -> Result<Complex64> {
    let first = factors
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty correlation".into()))?
        .coeffs()
        .basis();
    check_factors(factors, first)?;
    let degree: usize = factors.iter().map(Factor::degree).sum();
    let grid = QuadratureGrid::for_degree(first.manifold(), first.scale(), degree)?;
    Ok(product_field(factors, &grid)?.integrate())
}

/// `‖f‖_{L^p(M_λ)}` and `λ^{2/p}‖f̃‖_{L^p(M)}` for `f̃(x) = f(λx)`, each
/// evaluated on its own grid. Supports `p ∈ {2, 4}`.
pub fn lp_scaling_check(c: &SpectralCoeffs, p: u32) -> Result<(f64, f64)> {
    if p != 2 && p != 4 {
        return Err(Error::Unsupported(format!(
            "L^p scaling check supports p = 2 or 4, got {p}"
        )));
    }
    let basis = c.basis();
    let lambda = basis.scale();
    let degree = p as usize * c.support_bandwidth();

    let grid = QuadratureGrid::for_degree(basis.manifold(), lambda, degree)?;
    let lhs = synthesize(c, &grid)?
        .integrate_abs_pow(p as f64)
        .powf(1.0 / p as f64);

    // f̃ = Σ (c_k/λ) ẽ_k on the undilated surface; use a finer grid so the
    // two sides share no nodes.
    let base = basis.rescaled(1.0)?;
    let base_coeffs = SpectralCoeffs::new(
        base,
        c.values().iter().map(|v| v / lambda).collect(),
    )?;
    let base_grid = QuadratureGrid::for_degree(basis.manifold(), 1.0, degree + 3)?;
    let rhs = lambda.powf(2.0 / p as f64)
        * synthesize(&base_coeffs, &base_grid)?
            .integrate_abs_pow(p as f64)
            .powf(1.0 / p as f64);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::SpectralBasis;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn weights_sum_to_volume() {
        for lambda in [1.0, 2.5] {
            let t = QuadratureGrid::torus(lambda, 30).unwrap();
            let v = 4.0 * PI * PI * lambda * lambda;
            assert!((t.weights().iter().sum::<f64>() - v).abs() <= 1e-13 * v);
            let s = QuadratureGrid::sphere(lambda, 21, 40).unwrap();
            let v = 4.0 * PI * lambda * lambda;
            assert!((s.weights().iter().sum::<f64>() - v).abs() <= 1e-13 * v);
        }
    }

    #[test]
    fn constant_mode_values() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 3.0, 1.0).unwrap();
        let c = SpectralCoeffs::single_mode(b, ModeLabel::Lattice(0, 0), one()).unwrap();
        let grid = QuadratureGrid::for_degree(ManifoldKind::Torus, 1.0, 6).unwrap();
        let f = synthesize(&c, &grid).unwrap();
        assert!(f.values().iter().all(|v| (v - 1.0 / (2.0 * PI)).norm() < 1e-15));

        let b = SpectralBasis::new(ManifoldKind::Sphere, 3.0, 1.0).unwrap();
        let c = SpectralCoeffs::single_mode(b, ModeLabel::Harmonic { l: 0, m: 0 }, one()).unwrap();
        let grid = QuadratureGrid::for_degree(ManifoldKind::Sphere, 1.0, 6).unwrap();
        let f = synthesize(&c, &grid).unwrap();
        let expect = 1.0 / (4.0 * PI).sqrt();
        assert!(f.values().iter().all(|v| (v - expect).norm() < 1e-15));
    }

    #[test]
    fn sphere_y11_matches_closed_form() {
        let b = SpectralBasis::new(ManifoldKind::Sphere, 2.0, 1.0).unwrap();
        let c = SpectralCoeffs::single_mode(b, ModeLabel::Harmonic { l: 1, m: -1 }, one()).unwrap();
        let grid = QuadratureGrid::sphere(1.0, 5, 8).unwrap();
        let f = synthesize(&c, &grid).unwrap();
        for (j, v) in f.values().iter().enumerate() {
            let (theta, phi) = grid.node(j);
            let expect = (3.0 / (8.0 * PI)).sqrt()
                * theta.sin()
                * Complex64::from_polar(1.0, -phi);
            assert!((v - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn analyze_refuses_coarse_grid() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 8.0, 1.0).unwrap();
        let grid = QuadratureGrid::torus(1.0, 12).unwrap();
        let f = GridField::zeros(Arc::clone(&grid));
        match analyze(&f, &b) {
            Err(Error::InsufficientExactness { required, available }) => {
                assert_eq!(required, 16);
                assert_eq!(available, 11);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn character_product_lands_on_sum() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 4.0, 1.0).unwrap();
        let e1 = SpectralCoeffs::single_mode(Arc::clone(&b), ModeLabel::Lattice(1, 0), one()).unwrap();
        let e2 = SpectralCoeffs::single_mode(Arc::clone(&b), ModeLabel::Lattice(2, 0), one()).unwrap();
        let p = pointwise_product(&[Factor::Plain(&e1), Factor::Plain(&e2)], &b).unwrap();
        for (m, v) in b.modes().iter().zip(p.values()) {
            let expect = if m.label == ModeLabel::Lattice(3, 0) {
                1.0 / (2.0 * PI)
            } else {
                0.0
            };
            assert!((v - expect).norm() < 1e-15, "{:?}", m.label);
        }
    }

    #[test]
    fn y10_squared_has_no_high_degrees() {
        let b = SpectralBasis::new(ManifoldKind::Sphere, 6.0, 1.0).unwrap();
        let y = SpectralCoeffs::single_mode(Arc::clone(&b), ModeLabel::Harmonic { l: 1, m: 0 }, one())
            .unwrap();
        let p = pointwise_product(&[Factor::Plain(&y), Factor::Plain(&y)], &b).unwrap();
        let mut low = 0.0;
        for (m, v) in b.modes().iter().zip(p.values()) {
            if let ModeLabel::Harmonic { l, .. } = m.label {
                if l > 2 {
                    assert!(v.norm() < 1e-15);
                } else {
                    low += v.norm_sqr();
                }
            }
        }
        // ∫ (Y_1^0)^4 = 9/(20π) = ‖(Y_1^0)²‖².
        assert!((low - 9.0 / (20.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn sphere_triple_with_constant() {
        let b = SpectralBasis::new(ManifoldKind::Sphere, 2.0, 1.0).unwrap();
        let y0 = SpectralCoeffs::single_mode(Arc::clone(&b), ModeLabel::Harmonic { l: 0, m: 0 }, one())
            .unwrap();
        let y1 = SpectralCoeffs::single_mode(b, ModeLabel::Harmonic { l: 1, m: 0 }, one()).unwrap();
        let v = correlation_integral(&[Factor::Plain(&y0), Factor::Plain(&y1), Factor::Plain(&y1)])
            .unwrap();
        assert!((v - 1.0 / (4.0 * PI).sqrt()).norm() < 1e-15);
    }

    #[test]
    fn constant_lp_scaling() {
        let lambda = 3.0;
        let b = SpectralBasis::new(ManifoldKind::Sphere, 2.0, lambda).unwrap();
        // Constant function 1 on M_λ: coefficient λ√(4π) on the zero mode.
        let c = SpectralCoeffs::single_mode(
            b,
            ModeLabel::Harmonic { l: 0, m: 0 },
            Complex64::new(lambda * (4.0 * PI).sqrt(), 0.0),
        )
        .unwrap();
        let (lhs, rhs) = lp_scaling_check(&c, 2).unwrap();
        let expect = lambda * (4.0 * PI).sqrt();
        assert!((lhs - expect).abs() < 1e-13 * expect);
        assert!((rhs - expect).abs() < 1e-13 * expect);
        assert!(matches!(lp_scaling_check(&c, 3), Err(Error::Unsupported(_))));
    }
}
