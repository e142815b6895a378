//! Fourier-series tensorization of multilinear spectral multipliers.
//!
//! A symbol `m̄(n₁, …, n_k)` restricted to a block is rewritten in rescaled
//! variables `ñᵢ` as `Ψ(ñ)`, extended to a 4-periodic function and expanded as
//! `Ψ(ñ) = Σ_θ A(θ) e^{i θ·ñ}` with `θᵢ ∈ (π/2)ℤ`. Each term factors, so the
//! multilinear form becomes a sum of plain correlation integrals of modulated
//! fields.
//!
//! The periodic extension keeps `Ψ` unchanged on the block and, across the
//! gap to the next period, blends `Ψ(t)` into `Ψ(t − 4)` with a `C^∞` weight.
//! The symbol must therefore be finite on the block widened by the gap on
//! both sides.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imethod::IMultiplier;
use crate::spectra::SpectralCoeffs;
use crate::transform::{fft_friendly, synthesize, GridField, QuadratureGrid};

const PERIOD: f64 = 4.0;

/// Default cap on the number of symbol samples in one expansion.
pub const DEFAULT_SAMPLE_BUDGET: usize = 1 << 24;

/// Variable change `n = offset + scale · ñ` with `ñ ∈ [lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub offset: f64,
    pub scale: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Axis {
    /// Dyadic block `n ∈ [N, 2N]`, `ñ = n/N`; `[0, 2]` for `N = 1`.
    pub fn dyadic(n: f64) -> Self {
        Axis {
            offset: 0.0,
            scale: n,
            lo: if n <= 1.0 { 0.0 } else { 1.0 },
            hi: 2.0,
        }
    }

    /// `n = offset + scale · ñ`, `ñ ∈ [0, 1]`.
    pub fn affine(offset: f64, scale: f64) -> Self {
        Axis {
            offset,
            scale,
            lo: 0.0,
            hi: 1.0,
        }
    }

    pub fn to_n(&self, t: f64) -> f64 {
        self.offset + self.scale * t
    }

    pub fn to_t(&self, n: f64) -> f64 {
        (n - self.offset) / self.scale
    }

    /// Frequency range covered by the block.
    pub fn n_range(&self) -> (f64, f64) {
        (self.to_n(self.lo), self.to_n(self.hi))
    }

    fn gap(&self) -> f64 {
        PERIOD - (self.hi - self.lo)
    }
}

pub type SymbolFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Wraps a real-valued symbol.
pub fn real_symbol(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> SymbolFn {
    Arc::new(move |n: &[f64]| Complex64::new(f(n), 0.0))
}

/// A symbol together with the block it is expanded on.
#[derive(Clone)]
pub struct SymbolBlock {
    axes: Vec<Axis>,
    symbol: SymbolFn,
}

impl fmt::Debug for SymbolBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolBlock").field("axes", &self.axes).finish()
    }
}

impl SymbolBlock {
    pub fn new(axes: Vec<Axis>, symbol: SymbolFn) -> Result<Self> {
        if axes.is_empty() || axes.len() > 4 {
            return Err(Error::InvalidParameter(format!(
                "symbol arity must be between 1 and 4, got {}",
                axes.len()
            )));
        }
        for a in &axes {
            if !(a.scale > 0.0 && a.hi > a.lo && a.hi - a.lo <= 2.0) {
                return Err(Error::InvalidParameter(format!(
                    "axis {a:?} needs positive scale and a block of width at most 2"
                )));
            }
        }
        Ok(SymbolBlock { axes, symbol })
    }

    /// Dyadic blocks `[Nᵢ, 2Nᵢ]` in every variable.
    pub fn dyadic(scales: &[f64], symbol: SymbolFn) -> Result<Self> {
        Self::new(scales.iter().map(|&n| Axis::dyadic(n)).collect(), symbol)
    }

    pub fn arity(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// `m̄` at frequencies `n`.
    pub fn symbol_at(&self, n: &[f64]) -> Complex64 {
        (self.symbol)(n)
    }

    /// `Ψ(ñ) = m̄(n(ñ))`.
    pub fn psi(&self, t: &[f64]) -> Complex64 {
        let n: Vec<f64> = self.axes.iter().zip(t).map(|(a, &ti)| a.to_n(ti)).collect();
        (self.symbol)(&n)
    }

    /// The 4-periodic extension of `Ψ` at an arbitrary point.
    pub fn extended(&self, t: &[f64], ext: Extension) -> Complex64 {
        let parts: Vec<[(f64, f64); 2]> = self
            .axes
            .iter()
            .zip(t)
            .map(|(a, &ti)| blend_parts(a, ti, ext))
            .collect();
        let mut point = vec![0.0; t.len()];
        let mut total = Complex64::new(0.0, 0.0);
        for mask in 0..(1usize << t.len()) {
            let mut w = 1.0;
            for (d, p) in parts.iter().enumerate() {
                let (wd, td) = p[(mask >> d) & 1];
                w *= wd;
                point[d] = td;
            }
            if w != 0.0 {
                total += w * self.psi(&point);
            }
        }
        total
    }
}

/// `C^∞` step rising from 0 at `u ≤ 0` to 1 at `u ≥ 1`.
fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

/// Weighted evaluation points of the 1D extension at `t`.
fn blend_parts(axis: &Axis, t: f64, ext: Extension) -> [(f64, f64); 2] {
    let g = axis.gap();
    match ext {
        Extension::PeriodicBlend => {
            let r = axis.lo + (t - axis.lo).rem_euclid(PERIOD);
            if r <= axis.hi {
                return [(1.0, r), (0.0, r)];
            }
            let s = smooth_step((r - axis.hi) / g);
            [(1.0 - s, r), (s, r - PERIOD)]
        }
        Extension::Bump => {
            let start = axis.lo - 0.5 * g;
            let r = start + (t - start).rem_euclid(PERIOD);
            let w = if r < axis.lo {
                smooth_step((r - start) / (0.5 * g))
            } else if r <= axis.hi {
                1.0
            } else {
                1.0 - smooth_step((r - axis.hi) / (0.5 * g))
            };
            [(w, r), (0.0, r)]
        }
    }
}

/// How `Ψ` is continued to a 4-periodic function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Extension {
    /// Across the gap, `b Ψ(t) + (1 − b) Ψ(t − 4)` with a `C^∞` weight `b`.
    /// Symbols that are already 4-periodic (constants, quarter-lattice
    /// characters) are reproduced exactly.
    #[default]
    PeriodicBlend,
    /// `Ψ` times a `C^∞` bump equal to 1 on the block and vanishing half way
    /// across the gap on either side.
    Bump,
}

impl Extension {
    pub fn id(self) -> &'static str {
        match self {
            Extension::PeriodicBlend => "periodic-blend/exp/v1",
            Extension::Bump => "bump/exp/v1",
        }
    }
}

impl std::str::FromStr for Extension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic-blend" => Ok(Extension::PeriodicBlend),
            "bump" => Ok(Extension::Bump),
            other => Err(Error::InvalidParameter(format!(
                "unknown extension {other:?} (expected periodic-blend or bump)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorizeOptions {
    /// Fourier modes per axis, odd: `θ = (π/2) j` for `|j| ≤ (mode_cap − 1)/2`.
    pub mode_cap: usize,
    /// Quadrature points per axis, as a multiple of `mode_cap` (at least 4).
    pub oversample: usize,
    /// Held-out evaluation points per axis for the reconstruction error.
    pub held_out: usize,
    /// Absolute sup-error tolerance deciding the `converged` flag.
    pub tolerance: f64,
    pub sample_budget: usize,
    pub extension: Extension,
}

impl Default for TensorizeOptions {
    fn default() -> Self {
        TensorizeOptions {
            mode_cap: 9,
            oversample: 4,
            held_out: 17,
            tolerance: 1e-6,
            sample_budget: DEFAULT_SAMPLE_BUDGET,
            extension: Extension::PeriodicBlend,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorExpansion {
    pub axes: Vec<Axis>,
    pub mode_cap: usize,
    /// Row-major over axes; entry `(j₁, …, j_k)` at offsets `jᵢ + J`.
    pub coefficients: Vec<Complex64>,
    pub l1_mass: f64,
    pub sup_error: f64,
    pub relative_sup_error: f64,
    /// `sup |Ψ|` over the held-out points.
    pub symbol_sup: f64,
    /// Finite-difference `C²` norm of the extended `Ψ` over one period.
    pub c2_norm: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub window: String,
}

/// JSON summary of an expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSummary {
    pub axes: Vec<Axis>,
    pub window: String,
    pub mode_cap: usize,
    pub l1_mass: f64,
    pub sup_error: f64,
    pub relative_sup_error: f64,
    pub c2_norm: f64,
    pub converged: bool,
}

impl TensorExpansion {
    pub fn arity(&self) -> usize {
        self.axes.len()
    }

    pub fn half_width(&self) -> i64 {
        (self.mode_cap as i64 - 1) / 2
    }

    /// `θ` for per-axis index `idx ∈ [0, mode_cap)`.
    pub fn theta(&self, idx: usize) -> f64 {
        0.5 * PI * (idx as i64 - self.half_width()) as f64
    }

    pub fn coefficient(&self, j: &[i64]) -> Complex64 {
        let jm = self.half_width();
        let mut flat = 0usize;
        for &ji in j {
            if ji.abs() > jm {
                return Complex64::new(0.0, 0.0);
            }
            flat = flat * self.mode_cap + (ji + jm) as usize;
        }
        self.coefficients[flat]
    }

    pub fn summary(&self) -> ExpansionSummary {
        ExpansionSummary {
            axes: self.axes.clone(),
            window: self.window.clone(),
            mode_cap: self.mode_cap,
            l1_mass: self.l1_mass,
            sup_error: self.sup_error,
            relative_sup_error: self.relative_sup_error,
            c2_norm: self.c2_norm,
            converged: self.converged,
        }
    }

    /// Evaluates the truncated series on the tensor grid `points[d]`,
    /// returning values in row-major order.
    pub fn evaluate_grid(&self, points: &[Vec<f64>]) -> Vec<Complex64> {
        let k = self.arity();
        let mc = self.mode_cap;
        // Contract one axis at a time: shape goes from [p₀..p_{d-1}, mc, …, mc]
        // to [p₀..p_d, mc, …, mc].
        let mut data = self.coefficients.clone();
        let mut lead = 1usize;
        for (d, pts) in points.iter().enumerate().take(k) {
            let trail = mc.pow((k - d - 1) as u32);
            let phases: Vec<Vec<Complex64>> = pts
                .iter()
                .map(|&t| {
                    (0..mc)
                        .map(|j| Complex64::from_polar(1.0, self.theta(j) * t))
                        .collect()
                })
                .collect();
            let mut next = vec![Complex64::new(0.0, 0.0); lead * pts.len() * trail];
            for a in 0..lead {
                for (p, ph) in phases.iter().enumerate() {
                    let out = &mut next[(a * pts.len() + p) * trail..(a * pts.len() + p + 1) * trail];
                    for (j, e) in ph.iter().enumerate() {
                        let src = &data[(a * mc + j) * trail..(a * mc + j + 1) * trail];
                        for (o, s) in out.iter_mut().zip(src) {
                            *o += e * s;
                        }
                    }
                }
            }
            data = next;
            lead *= pts.len();
        }
        data
    }
}

/// Fourier coefficients of the extended symbol up to `opts.mode_cap` modes
/// per axis.
pub fn tensorize(block: &SymbolBlock, opts: &TensorizeOptions) -> Result<TensorExpansion> {
    if opts.mode_cap == 0 || opts.mode_cap % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "mode cap must be odd, got {}",
            opts.mode_cap
        )));
    }
    if opts.oversample < 4 {
        return Err(Error::InvalidParameter(format!(
            "oversampling factor must be at least 4, got {}",
            opts.oversample
        )));
    }
    let k = block.arity();
    let q = fft_friendly(opts.oversample * opts.mode_cap);
    let total = q.checked_pow(k as u32).unwrap_or(usize::MAX);
    if total > opts.sample_budget {
        return Err(Error::GridBudgetExceeded {
            required: total,
            budget: opts.sample_budget,
        });
    }

    // Samples of the extension on t_q = lo + 4q/Q, row-major.
    let nodes: Vec<Vec<f64>> = block
        .axes()
        .iter()
        .map(|a| (0..q).map(|i| a.lo + PERIOD * i as f64 / q as f64).collect())
        .collect();
    let mut samples = vec![Complex64::new(0.0, 0.0); total];
    let mut t = vec![0.0; k];
    for (flat, s) in samples.iter_mut().enumerate() {
        let mut r = flat;
        for d in (0..k).rev() {
            t[d] = nodes[d][r % q];
            r /= q;
        }
        *s = block.extended(&t, opts.extension);
    }
    let c2_norm = periodic_c2_norm(&samples, q, k);

    fft_nd(&mut samples, q, k);
    let mc = opts.mode_cap;
    let jm = (mc as i64 - 1) / 2;
    let norm = 1.0 / total as f64;
    let mut coefficients = vec![Complex64::new(0.0, 0.0); mc.pow(k as u32)];
    for (flat, c) in coefficients.iter_mut().enumerate() {
        let mut r = flat;
        let mut src = 0usize;
        let mut stride = 1usize;
        let mut phase = 0.0;
        for d in (0..k).rev() {
            let j = (r % mc) as i64 - jm;
            r /= mc;
            src += (j.rem_euclid(q as i64) as usize) * stride;
            stride *= q;
            phase -= 0.5 * PI * j as f64 * block.axes()[d].lo;
        }
        *c = samples[src] * norm * Complex64::from_polar(1.0, phase);
    }
    let l1_mass = coefficients.iter().map(|c| c.norm()).sum();

    let mut expansion = TensorExpansion {
        axes: block.axes().to_vec(),
        mode_cap: mc,
        coefficients,
        l1_mass,
        sup_error: 0.0,
        relative_sup_error: 0.0,
        symbol_sup: 0.0,
        c2_norm,
        tolerance: opts.tolerance,
        converged: false,
        window: opts.extension.id().to_string(),
    };

    // Held-out midpoints of a uniform partition of each block.
    let held: Vec<Vec<f64>> = block
        .axes()
        .iter()
        .map(|a| {
            (0..opts.held_out)
                .map(|p| a.lo + (a.hi - a.lo) * (p as f64 + 0.5) / opts.held_out as f64)
                .collect()
        })
        .collect();
    let recon = expansion.evaluate_grid(&held);
    let mut sup_error: f64 = 0.0;
    let mut symbol_sup: f64 = 0.0;
    let h = opts.held_out;
    for (flat, v) in recon.iter().enumerate() {
        let mut r = flat;
        for d in (0..k).rev() {
            t[d] = held[d][r % h];
            r /= h;
        }
        let exact = block.psi(&t);
        symbol_sup = symbol_sup.max(exact.norm());
        sup_error = sup_error.max((v - exact).norm());
    }
    expansion.sup_error = sup_error;
    expansion.symbol_sup = symbol_sup;
    expansion.relative_sup_error = if symbol_sup > 0.0 {
        sup_error / symbol_sup
    } else {
        sup_error
    };
    expansion.converged = sup_error <= opts.tolerance;
    Ok(expansion)
}

/// In-place forward DFT along every axis of a row-major `q^k` array.
fn fft_nd(data: &mut [Complex64], q: usize, k: usize) {
    let fft = FftPlanner::new().plan_fft_forward(q);
    let mut line = vec![Complex64::new(0.0, 0.0); q];
    for d in 0..k {
        let stride = q.pow((k - d - 1) as u32);
        let block = stride * q;
        for start in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for (i, l) in line.iter_mut().enumerate() {
                    *l = data[start + off + i * stride];
                }
                fft.process(&mut line);
                for (i, l) in line.iter().enumerate() {
                    data[start + off + i * stride] = *l;
                }
            }
        }
    }
}

/// `max_{|α| ≤ 2} sup |∂^α Ψ|` by periodic central differences on the
/// sampling grid (spacing `4/Q`).
fn periodic_c2_norm(samples: &[Complex64], q: usize, k: usize) -> f64 {
    let h = PERIOD / q as f64;
    let strides: Vec<usize> = (0..k).map(|d| q.pow((k - d - 1) as u32)).collect();
    let shift = |flat: usize, d: usize, by: i64| -> usize {
        let coord = (flat / strides[d]) % q;
        let moved = (coord as i64 + by).rem_euclid(q as i64) as usize;
        flat - coord * strides[d] + moved * strides[d]
    };
    let mut best: f64 = 0.0;
    for flat in 0..samples.len() {
        let f = |i: usize| samples[i];
        best = best.max(f(flat).norm());
        for d in 0..k {
            let (p, m) = (shift(flat, d, 1), shift(flat, d, -1));
            best = best.max(((f(p) - f(m)) / (2.0 * h)).norm());
            best = best.max(((f(p) - 2.0 * f(flat) + f(m)) / (h * h)).norm());
            for e in (d + 1)..k {
                let pp = shift(p, e, 1);
                let pm = shift(p, e, -1);
                let mp = shift(m, e, 1);
                let mm = shift(m, e, -1);
                best = best.max(((f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h)).norm());
            }
        }
    }
    best
}

/// Synthesized modulated copies `Σ_n e^{iθ ñ(n)} π_n f` for every `θ` of one axis.
fn modulated_fields(
    f: &SpectralCoeffs,
    axis: &Axis,
    expansion: &TensorExpansion,
    grid: &Arc<QuadratureGrid>,
) -> Result<Vec<GridField>> {
    (0..expansion.mode_cap)
        .map(|j| {
            let theta = expansion.theta(j);
            let modulated =
                f.map_modes(|m, v| v * Complex64::from_polar(1.0, theta * axis.to_t(m.frequency)));
            synthesize(&modulated, grid)
        })
        .collect()
}

/// Multiplies coefficient `n` by `e^{iθ ñ(n)}`; unitary.
pub fn modulate(f: &SpectralCoeffs, axis: &Axis, theta: f64) -> SpectralCoeffs {
    f.map_modes(|m, v| v * Complex64::from_polar(1.0, theta * axis.to_t(m.frequency)))
}

fn check_localized(f: &SpectralCoeffs, axis: &Axis, slot: usize) -> Result<()> {
    let (a, b) = axis.n_range();
    let slack = 1e-9 * b.abs().max(1.0);
    for (m, v) in f.basis().modes().iter().zip(f.values()) {
        if v.norm_sqr() > 0.0 && (m.frequency < a - slack || m.frequency > b + slack) {
            return Err(Error::BlockMismatch(format!(
                "slot {slot} has frequency {} outside [{a}, {b}]",
                m.frequency
            )));
        }
    }
    Ok(())
}

/// `Σ_θ A(θ) ∫ Πᵢ fᵢ^{θᵢ}` where `f^θ` carries the modulation `e^{iθ ñ(n)}`
/// on its frequency-`n` component.
pub fn apply_tensorized_form(
    expansion: &TensorExpansion,
    fields: &[&SpectralCoeffs],
) -> Result<Complex64> {
    let k = expansion.arity();
    if fields.len() != k {
        return Err(Error::BlockMismatch(format!(
            "expansion has arity {k}, got {} fields",
            fields.len()
        )));
    }
    let basis = fields[0].basis();
    if fields.iter().any(|f| !f.basis().same_surface(basis)) {
        return Err(Error::Mismatch("fields live on different surfaces".into()));
    }
    for (i, (f, a)) in fields.iter().zip(&expansion.axes).enumerate() {
        check_localized(f, a, i)?;
    }
    let degree: usize = fields.iter().map(|f| f.support_bandwidth()).sum();
    let grid = QuadratureGrid::for_degree(basis.manifold(), basis.scale(), degree)?;
    let modulated = fields
        .iter()
        .zip(&expansion.axes)
        .map(|(f, a)| modulated_fields(f, a, expansion, &grid))
        .collect::<Result<Vec<_>>>()?;
    let weighted: Vec<Complex64> = grid.weights().iter().map(|&w| Complex64::new(w, 0.0)).collect();
    Ok(contract(expansion, &modulated, 0, 0, &weighted))
}

fn contract(
    expansion: &TensorExpansion,
    modulated: &[Vec<GridField>],
    axis: usize,
    flat: usize,
    partial: &[Complex64],
) -> Complex64 {
    let mc = expansion.mode_cap;
    let last = axis + 1 == modulated.len();
    let mut total = Complex64::new(0.0, 0.0);
    for (j, field) in modulated[axis].iter().enumerate() {
        let idx = flat * mc + j;
        if last {
            let a = expansion.coefficients[idx];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let integral: Complex64 = partial.iter().zip(field.values()).map(|(p, v)| p * v).sum();
            total += a * integral;
        } else {
            let next: Vec<Complex64> = partial.iter().zip(field.values()).map(|(p, v)| p * v).collect();
            total += contract(expansion, modulated, axis + 1, idx, &next);
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBound {
    pub alpha: Vec<u32>,
    /// `max |∂^α m̄| Πᵢ ⟨nᵢ⟩^{αᵢ}` over the sample grid, `⟨n⟩ = (1 + n²)^{1/2}`.
    pub max_scaled: f64,
}

/// Scaled derivatives of the symbol up to `order ≤ 2`, by central finite
/// differences on `samples` points per axis of the block.
pub fn symbol_estimate_check(
    block: &SymbolBlock,
    order: u32,
    samples: usize,
) -> Result<Vec<DerivativeBound>> {
    if order > 2 {
        return Err(Error::Unsupported(format!(
            "symbol estimates are checked up to order 2, got {order}"
        )));
    }
    let k = block.arity();
    let mut alphas: Vec<Vec<u32>> = Vec::new();
    for d in 0..k {
        if order >= 1 {
            let mut a = vec![0; k];
            a[d] = 1;
            alphas.push(a);
        }
        if order >= 2 {
            let mut a = vec![0; k];
            a[d] = 2;
            alphas.push(a);
            for e in (d + 1)..k {
                let mut a = vec![0; k];
                a[d] = 1;
                a[e] = 1;
                alphas.push(a);
            }
        }
    }
    let axes = block.axes();
    let pts: Vec<Vec<f64>> = axes
        .iter()
        .map(|a| {
            let (lo, hi) = a.n_range();
            (0..samples.max(1))
                .map(|p| {
                    if samples <= 1 {
                        0.5 * (lo + hi)
                    } else {
                        lo + (hi - lo) * p as f64 / (samples - 1) as f64
                    }
                })
                .collect()
        })
        .collect();
    let count = samples.max(1).pow(k as u32);
    let mut bounds: Vec<DerivativeBound> = alphas
        .iter()
        .map(|a| DerivativeBound {
            alpha: a.clone(),
            max_scaled: 0.0,
        })
        .collect();
    let mut n = vec![0.0; k];
    for flat in 0..count {
        let mut r = flat;
        for d in (0..k).rev() {
            n[d] = pts[d][r % samples.max(1)];
            r /= samples.max(1);
        }
        for b in bounds.iter_mut() {
            let deriv = finite_difference(block, &n, &b.alpha);
            let weight: f64 = b
                .alpha
                .iter()
                .zip(&n)
                .map(|(&a, &ni)| (1.0 + ni * ni).sqrt().powi(a as i32))
                .product();
            b.max_scaled = b.max_scaled.max(deriv.norm() * weight);
        }
    }
    Ok(bounds)
}

fn finite_difference(block: &SymbolBlock, n: &[f64], alpha: &[u32]) -> Complex64 {
    let dirs: Vec<usize> = alpha
        .iter()
        .enumerate()
        .flat_map(|(d, &a)| std::iter::repeat_n(d, a as usize))
        .collect();
    let step = |d: usize| 1e-3 * n[d].abs().max(1.0);
    let mut x = n.to_vec();
    match dirs.as_slice() {
        [d] => {
            let h = step(*d);
            x[*d] = n[*d] + h;
            let p = block.symbol_at(&x);
            x[*d] = n[*d] - h;
            let m = block.symbol_at(&x);
            (p - m) / (2.0 * h)
        }
        [d, e] if d == e => {
            let h = step(*d);
            let c = block.symbol_at(n);
            x[*d] = n[*d] + h;
            let p = block.symbol_at(&x);
            x[*d] = n[*d] - h;
            let m = block.symbol_at(&x);
            (p - 2.0 * c + m) / (h * h)
        }
        [d, e] => {
            let (hd, he) = (step(*d), step(*e));
            let mut eval = |sd: f64, se: f64| {
                x[*d] = n[*d] + sd * hd;
                x[*e] = n[*e] + se * he;
                block.symbol_at(&x)
            };
            (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * hd * he)
        }
        _ => block.symbol_at(n),
    }
}

/// Parameters of the almost-conservation symbol
/// `m̄ = [1 − m(n₁)/(m(n₂)m(n₃)m(n₄))] (−2)^l / (n₁² − n₂² − n₃² − n₄²)^l`
/// on the block `n₁ = N₂ + αN₃ + N₃ñ₁`, `n₂ = N₂ + βN₃ + N₃ñ₂`,
/// `n₃ = N₃(1 + ñ₃)`, `n₄ = N₄(1 + ñ₄)`, `ñ ∈ [0, 1]⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonantBlock {
    pub n_cut: f64,
    pub s: f64,
    pub l: u32,
    pub n2: f64,
    pub n3: f64,
    pub n4: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ResonantBlock {
    pub fn axes(&self) -> Vec<Axis> {
        vec![
            Axis::affine(self.n2 + self.alpha * self.n3, self.n3),
            Axis::affine(self.n2 + self.beta * self.n3, self.n3),
            Axis::affine(self.n3, self.n3),
            Axis::affine(self.n4, self.n4),
        ]
    }

    /// Smallest `n₁² − n₂² − n₃² − n₄²` over the block widened by the
    /// extension gap.
    pub fn min_denominator(&self) -> f64 {
        let r: Vec<(f64, f64)> = self
            .axes()
            .iter()
            .map(|a| {
                let g = a.gap();
                let (x, y) = (a.to_n(a.lo - g), a.to_n(a.hi + g));
                (x.min(y), x.max(y))
            })
            .collect();
        let max_sq = |(a, b): (f64, f64)| a.abs().max(b.abs()).powi(2);
        let min_sq = |(a, b): (f64, f64)| if a <= 0.0 && b >= 0.0 { 0.0 } else { a.abs().min(b.abs()).powi(2) };
        min_sq(r[0]) - max_sq(r[1]) - max_sq(r[2]) - max_sq(r[3])
    }

    pub fn block(&self) -> Result<SymbolBlock> {
        let mult = IMultiplier::new(self.n_cut, self.s)?;
        if self.min_denominator() <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "resonance denominator changes sign near the block {self:?}"
            )));
        }
        let l = self.l as i32;
        let sign = (-2.0f64).powi(l);
        SymbolBlock::new(
            self.axes(),
            real_symbol(move |n: &[f64]| {
                let m = |x: f64| mult.value(x.abs());
                let den = n[0] * n[0] - n[1] * n[1] - n[2] * n[2] - n[3] * n[3];
                (1.0 - m(n[0]) / (m(n[1]) * m(n[2]) * m(n[3]))) * sign / den.powi(l)
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(v: f64) -> SymbolFn {
        real_symbol(move |_: &[f64]| v)
    }

    #[test]
    fn constant_symbol_is_one_coefficient() {
        let block = SymbolBlock::dyadic(&[4.0, 8.0, 2.0], constant(1.0)).unwrap();
        let e = tensorize(&block, &TensorizeOptions::default()).unwrap();
        assert!((e.coefficient(&[0, 0, 0]) - 1.0).norm() < 1e-12);
        assert!((e.l1_mass - 1.0).abs() < 1e-10);
        assert!(e.sup_error < 1e-12 && e.converged);
        assert_eq!(e.window, "periodic-blend/exp/v1");
    }

    #[test]
    fn quarter_lattice_character_is_single_coefficient() {
        let (a, b) = (0.5 * PI, -PI);
        let (n1, n2) = (8.0, 4.0);
        let block = SymbolBlock::dyadic(
            &[n1, n2],
            Arc::new(move |n: &[f64]| Complex64::from_polar(1.0, a * n[0] / n1 + b * n[1] / n2)),
        )
        .unwrap();
        let e = tensorize(&block, &TensorizeOptions::default()).unwrap();
        for j1 in -4i64..=4 {
            for j2 in -4i64..=4 {
                let expect = if (j1, j2) == (1, -2) { 1.0 } else { 0.0 };
                assert!((e.coefficient(&[j1, j2]) - expect).norm() < 1e-12, "{j1} {j2}");
            }
        }
    }

    #[test]
    fn extension_is_periodic_and_keeps_block() {
        let block = SymbolBlock::new(
            vec![Axis::affine(3.0, 2.0)],
            real_symbol(|n: &[f64]| 1.0 / (1.0 + n[0] * n[0])),
        )
        .unwrap();
        for ext in [Extension::PeriodicBlend, Extension::Bump] {
            for t in [0.0, 0.3, 1.0] {
                assert_eq!(block.extended(&[t], ext), block.psi(&[t]));
            }
            for t in [1.2, 2.5, 3.9] {
                assert!((block.extended(&[t], ext) - block.extended(&[t - 4.0], ext)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn smooth_symbol_converges() {
        let block = SymbolBlock::dyadic(
            &[16.0, 16.0],
            real_symbol(|n: &[f64]| 1.0 / (1.0 + (n[0] / 16.0).powi(2) + (n[1] / 32.0).powi(2))),
        )
        .unwrap();
        for extension in [Extension::PeriodicBlend, Extension::Bump] {
            let mut prev = f64::INFINITY;
            for mc in [9, 17, 33, 65] {
                let opts = TensorizeOptions { mode_cap: mc, extension, ..Default::default() };
                let e = tensorize(&block, &opts).unwrap();
                assert!(e.sup_error <= 1.1 * prev, "mc={mc}: {} vs {prev}", e.sup_error);
                prev = e.sup_error;
            }
            assert!(prev < 1e-5, "{extension:?}: {prev}");
        }
    }

    #[test]
    fn symbol_estimates_constant_vanish() {
        let block = SymbolBlock::dyadic(&[8.0, 4.0], constant(1.0)).unwrap();
        let b = symbol_estimate_check(&block, 2, 9).unwrap();
        assert_eq!(b.len(), 5);
        assert!(b.iter().all(|d| d.max_scaled <= 1e-8));
    }

    #[test]
    fn even_mode_cap_rejected() {
        let block = SymbolBlock::dyadic(&[8.0], constant(1.0)).unwrap();
        let opts = TensorizeOptions { mode_cap: 8, ..Default::default() };
        assert!(tensorize(&block, &opts).is_err());
    }

    #[test]
    fn resonant_block_rejects_vanishing_denominator() {
        let p = ResonantBlock { n_cut: 16.0, s: 0.7, l: 3, n2: 64.0, n3: 2.0, n4: 1.0, alpha: 0.0, beta: 0.0 };
        assert!(p.block().is_err());
        let p = ResonantBlock { alpha: 10.0, ..p };
        assert!(p.min_denominator() > 0.0);
        let block = p.block().unwrap();
        let v = block.psi(&[0.5, 0.5, 0.5, 0.5]).re;
        assert!(v < 0.0 && v.abs() < 1e-8);
    }
}
