//! Laplace–Beltrami eigenbases of the flat torus and the round sphere.
//!
//! A [`SpectralBasis`] enumerates every eigenmode of `-Δ` on the dilated
//! surface `M_λ` whose frequency `n = √ν` lies below a cutoff. Eigenfunctions
//! are `L²(M_λ)`-orthonormal:
//!
//! * torus `(ℝ/2πλℤ)²`: `e_ξ(x) = exp(i ξ·x/λ) / (2πλ)`, `ν = |ξ|²/λ²`
//! * sphere of radius `λ`: `e_{l,m} = Y_l^m / λ`, `ν = l(l+1)/λ²`
//!
//! Field states are [`SpectralCoeffs`], complex vectors aligned with a basis.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Default upper bound on the number of modes a basis may hold.
pub const DEFAULT_MODE_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    /// Square torus with side `2π` per dimension.
    Torus,
    /// Unit round sphere.
    Sphere,
}

impl ManifoldKind {
    /// Volume of the undilated surface.
    pub fn base_volume(self) -> f64 {
        match self {
            ManifoldKind::Torus => 4.0 * PI * PI,
            ManifoldKind::Sphere => 4.0 * PI,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::Torus => "torus",
            ManifoldKind::Sphere => "sphere",
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus" => Ok(ManifoldKind::Torus),
            "sphere" => Ok(ManifoldKind::Sphere),
            other => Err(Error::InvalidParameter(format!(
                "unknown manifold `{other}` (expected torus or sphere)"
            ))),
        }
    }
}

/// Identifies an eigenfunction independently of the dilation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeLabel {
    /// Torus character with lattice frequency `ξ = (x, y)`.
    Lattice(i32, i32),
    /// Spherical harmonic `Y_l^m`, `|m| ≤ l`.
    Harmonic { l: u32, m: i32 },
}

impl ModeLabel {
    /// Eigenvalue of `-Δ` on the undilated surface; always an integer.
    pub fn base_eigenvalue(self) -> u64 {
        match self {
            ModeLabel::Lattice(x, y) => (x as i64 * x as i64 + y as i64 * y as i64) as u64,
            ModeLabel::Harmonic { l, .. } => l as u64 * (l as u64 + 1),
        }
    }

    /// Label of the eigenfunction proportional to the complex conjugate.
    ///
    /// `conj(e_ξ) = e_{-ξ}` and `conj(Y_l^m) = (-1)^m Y_l^{-m}`; the phase is
    /// returned alongside.
    pub fn conjugate(self) -> (ModeLabel, f64) {
        match self {
            ModeLabel::Lattice(x, y) => (ModeLabel::Lattice(-x, -y), 1.0),
            ModeLabel::Harmonic { l, m } => {
                let phase = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                (ModeLabel::Harmonic { l, m: -m }, phase)
            }
        }
    }

    /// Per-axis lattice bandwidth (torus) or degree (sphere).
    pub fn bandwidth(self) -> usize {
        match self {
            ModeLabel::Lattice(x, y) => x.unsigned_abs().max(y.unsigned_abs()) as usize,
            ModeLabel::Harmonic { l, .. } => l as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub index: usize,
    /// Eigenvalue `ν` of `-Δ_λ`.
    pub eigenvalue: f64,
    /// Frequency `n = √ν`.
    pub frequency: f64,
    pub label: ModeLabel,
}

/// Ordered enumeration of the eigenmodes of `M_λ` below a frequency cutoff.
///
/// Immutable once built; share it through `Arc`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    manifold: ManifoldKind,
    scale: f64,
    cutoff: f64,
    modes: Vec<Mode>,
    lookup: HashMap<ModeLabel, usize>,
    bandwidth: usize,
}

/// Serializable summary of a basis for run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub manifold: ManifoldKind,
    pub lambda: f64,
    pub cutoff: f64,
    pub mode_count: usize,
    pub content_hash: String,
}

impl SpectralBasis {
    /// Every mode with rescaled frequency `≤ cutoff` on `M_λ`, `λ = scale`.
    pub fn new(manifold: ManifoldKind, cutoff: f64, scale: f64) -> Result<Arc<Self>> {
        Self::with_mode_cap(manifold, cutoff, scale, DEFAULT_MODE_CAP)
    }

    pub fn with_mode_cap(
        manifold: ManifoldKind,
        cutoff: f64,
        scale: f64,
        cap: usize,
    ) -> Result<Arc<Self>> {
        if !(cutoff.is_finite() && cutoff >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "basis cutoff must be a finite value >= 1, got {cutoff}"
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {scale}"
            )));
        }
        // Largest base eigenvalue admitted; the relative slack absorbs the
        // rounding of `cutoff * scale` so that exact integer cases are kept.
        let base_cut = cutoff * scale;
        let max_eig = base_cut * base_cut * (1.0 + 1e-12);
        let max_axis = base_cut.floor() as i64;

        let estimate = match manifold {
            ManifoldKind::Torus => (PI * base_cut * base_cut) as usize,
            ManifoldKind::Sphere => {
                let l = (max_axis + 1) as usize;
                l * l
            }
        };
        if estimate > cap {
            return Err(Error::ModeCapExceeded {
                count: estimate,
                cap,
            });
        }

        let mut labels = Vec::with_capacity(estimate + 16);
        match manifold {
            ManifoldKind::Torus => {
                for x in -max_axis..=max_axis {
                    for y in -max_axis..=max_axis {
                        let e = (x * x + y * y) as f64;
                        if e <= max_eig {
                            labels.push(ModeLabel::Lattice(x as i32, y as i32));
                        }
                    }
                }
            }
            ManifoldKind::Sphere => {
                for l in 0..=max_axis.max(0) {
                    let e = (l * (l + 1)) as f64;
                    if e > max_eig {
                        break;
                    }
                    for m in -l..=l {
                        labels.push(ModeLabel::Harmonic {
                            l: l as u32,
                            m: m as i32,
                        });
                    }
                }
            }
        }
        if labels.len() > cap {
            return Err(Error::ModeCapExceeded {
                count: labels.len(),
                cap,
            });
        }
        labels.sort_by(|a, b| {
            a.base_eigenvalue()
                .cmp(&b.base_eigenvalue())
                .then_with(|| a.cmp(b))
        });
        Ok(Arc::new(Self::from_sorted_labels(
            manifold, cutoff, scale, labels,
        )))
    }

    fn from_sorted_labels(
        manifold: ManifoldKind,
        cutoff: f64,
        scale: f64,
        labels: Vec<ModeLabel>,
    ) -> Self {
        let inv_scale2 = 1.0 / (scale * scale);
        let mut lookup = HashMap::with_capacity(labels.len());
        let mut bandwidth = 0;
        let modes = labels
            .into_iter()
            .enumerate()
            .map(|(index, label)| {
                lookup.insert(label, index);
                bandwidth = bandwidth.max(label.bandwidth());
                let base = label.base_eigenvalue() as f64;
                let eigenvalue = base * inv_scale2;
                Mode {
                    index,
                    eigenvalue,
                    frequency: base.sqrt() / scale,
                    label,
                }
            })
            .collect();
        SpectralBasis {
            manifold,
            scale,
            cutoff,
            modes,
            lookup,
            bandwidth,
        }
    }

    /// The same set of labelled modes transported to `M_{new_scale}`.
    ///
    /// Ordering is unchanged because every eigenvalue scales by the same factor.
    pub fn rescaled(&self, new_scale: f64) -> Result<Arc<Self>> {
        if !(new_scale.is_finite() && new_scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {new_scale}"
            )));
        }
        let cutoff = self.cutoff * self.scale / new_scale;
        let labels = self.modes.iter().map(|m| m.label).collect();
        Ok(Arc::new(Self::from_sorted_labels(
            self.manifold,
            cutoff,
            new_scale,
            labels,
        )))
    }

    pub fn manifold(&self) -> ManifoldKind {
        self.manifold
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn index_of(&self, label: ModeLabel) -> Option<usize> {
        self.lookup.get(&label).copied()
    }

    /// Largest per-axis lattice frequency (torus) or degree (sphere).
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Volume of `M_λ`.
    pub fn volume(&self) -> f64 {
        self.scale * self.scale * self.manifold.base_volume()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.modes.last().map_or(0.0, |m| m.eigenvalue)
    }

    /// True when both bases describe the same surface at the same dilation.
    pub fn same_surface(&self, other: &SpectralBasis) -> bool {
        self.manifold == other.manifold && same_scale(self.scale, other.scale)
    }

    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.manifold.name().as_bytes());
        hasher.update(self.scale.to_bits().to_le_bytes());
        hasher.update(self.cutoff.to_bits().to_le_bytes());
        for mode in &self.modes {
            match mode.label {
                ModeLabel::Lattice(x, y) => {
                    hasher.update([0u8]);
                    hasher.update(x.to_le_bytes());
                    hasher.update(y.to_le_bytes());
                }
                ModeLabel::Harmonic { l, m } => {
                    hasher.update([1u8]);
                    hasher.update(l.to_le_bytes());
                    hasher.update(m.to_le_bytes());
                }
            }
        }
        hex::encode(hasher.finalize())
    }

    pub fn descriptor(&self) -> BasisDescriptor {
        BasisDescriptor {
            manifold: self.manifold,
            lambda: self.scale,
            cutoff: self.cutoff,
            mode_count: self.len(),
            content_hash: self.content_hash(),
        }
    }

    /// Distinct eigenfrequencies in increasing order, each with the indices
    /// of the modes spanning its eigenspace.
    pub fn eigenspaces(&self) -> Vec<(f64, Vec<usize>)> {
        let mut spaces: Vec<(u64, f64, Vec<usize>)> = Vec::new();
        for mode in &self.modes {
            let key = mode.label.base_eigenvalue();
            match spaces.last_mut() {
                Some((k, _, idx)) if *k == key => idx.push(mode.index),
                _ => spaces.push((key, mode.frequency, vec![mode.index])),
            }
        }
        spaces.into_iter().map(|(_, n, idx)| (n, idx)).collect()
    }
}

pub(crate) fn same_scale(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Complex coefficients of a field in an orthonormal eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralCoeffs {
    basis: Arc<SpectralBasis>,
    values: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn new(basis: Arc<SpectralBasis>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != basis.len() {
            return Err(Error::Mismatch(format!(
                "{} coefficients for a basis of {} modes",
                values.len(),
                basis.len()
            )));
        }
        Ok(SpectralCoeffs { basis, values })
    }

    pub fn zeros(basis: Arc<SpectralBasis>) -> Self {
        let n = basis.len();
        SpectralCoeffs {
            basis,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// The eigenfunction with the given label scaled by `amplitude`.
    pub fn single_mode(
        basis: Arc<SpectralBasis>,
        label: ModeLabel,
        amplitude: Complex64,
    ) -> Result<Self> {
        let idx = basis
            .index_of(label)
            .ok_or_else(|| Error::Mismatch(format!("mode {label:?} is not in the basis")))?;
        let mut c = Self::zeros(basis);
        c.values[idx] = amplitude;
        Ok(c)
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, label: ModeLabel) -> Option<Complex64> {
        self.basis.index_of(label).map(|i| self.values[i])
    }

    /// `Σ |c_k|²`, the squared `L²(M_λ)` norm.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// Coefficient-wise map `c_k ↦ f(mode_k, c_k)`.
    pub fn map_modes(&self, f: impl Fn(&Mode, Complex64) -> Complex64) -> Self {
        let values = self
            .basis
            .modes()
            .iter()
            .zip(&self.values)
            .map(|(m, &c)| f(m, c))
            .collect();
        SpectralCoeffs {
            basis: Arc::clone(&self.basis),
            values,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.map_modes(|_, c| c * factor)
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: Complex64, other: &SpectralCoeffs) -> Result<Self> {
        self.check_same_basis(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(SpectralCoeffs {
            basis: Arc::clone(&self.basis),
            values,
        })
    }

    /// `L²` distance to another state on the same basis.
    pub fn l2_distance(&self, other: &SpectralCoeffs) -> Result<f64> {
        self.check_same_basis(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Coefficients of the complex conjugate field.
    pub fn conjugate(&self) -> Self {
        let mut out = Self::zeros(Arc::clone(&self.basis));
        for (mode, &c) in self.basis.modes().iter().zip(&self.values) {
            let (label, phase) = mode.label.conjugate();
            let j = self
                .basis
                .index_of(label)
                .expect("bases are closed under conjugation");
            out.values[j] = c.conj() * phase;
        }
        out
    }

    /// Re-express on another basis of the same surface; modes absent from
    /// the target are dropped, modes absent from the source are zero.
    pub fn transfer_to(&self, target: &Arc<SpectralBasis>) -> Result<Self> {
        if !self.basis.same_surface(target) {
            return Err(Error::Mismatch(
                "cannot transfer coefficients between different surfaces".into(),
            ));
        }
        let mut out = Self::zeros(Arc::clone(target));
        for (mode, &c) in self.basis.modes().iter().zip(&self.values) {
            if let Some(j) = target.index_of(mode.label) {
                out.values[j] = c;
            }
        }
        Ok(out)
    }

    /// Largest frequency carrying a nonzero coefficient.
    pub fn support_max_frequency(&self) -> f64 {
        self.basis
            .modes()
            .iter()
            .zip(&self.values)
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(m, _)| m.frequency)
            .fold(0.0, f64::max)
    }

    /// Largest per-axis frequency or degree carrying a nonzero coefficient.
    pub fn support_bandwidth(&self) -> usize {
        self.basis
            .modes()
            .iter()
            .zip(&self.values)
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(m, _)| m.label.bandwidth())
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn check_same_basis(&self, other: &SpectralCoeffs) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis)
            || (self.basis.same_surface(&other.basis) && self.basis.len() == other.basis.len())
        {
            Ok(())
        } else {
            Err(Error::Mismatch("operands live on different bases".into()))
        }
    }
}

/// `P_I` for the half-open frequency interval `I = [a, b)`.
pub fn project_interval(c: &SpectralCoeffs, a: f64, b: f64) -> Result<SpectralCoeffs> {
    if !(a >= 0.0 && a < b) {
        return Err(Error::InvalidParameter(format!(
            "projection interval [{a}, {b}) must satisfy 0 <= a < b"
        )));
    }
    Ok(c.map_modes(|m, v| {
        if m.frequency >= a && m.frequency < b {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Littlewood–Paley piece `P_N`: `[0, 2)` for `N = 1`, `[N, 2N)` otherwise.
pub fn dyadic_projection(c: &SpectralCoeffs, n: u64) -> Result<SpectralCoeffs> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "dyadic scale must be a power of two, got {n}"
        )));
    }
    if n == 1 {
        project_interval(c, 0.0, 2.0)
    } else {
        project_interval(c, n as f64, 2.0 * n as f64)
    }
}

/// Dyadic scales `1, 2, 4, …` up to the largest one meeting the basis.
pub fn dyadic_scales(basis: &SpectralBasis) -> Vec<u64> {
    let top = basis.modes().last().map_or(0.0, |m| m.frequency);
    let mut out = vec![1u64];
    let mut n = 2u64;
    while (n as f64) <= top {
        out.push(n);
        n *= 2;
    }
    out
}

/// `(Σ ⟨ν_k⟩^s |c_k|²)^{1/2}` with `⟨ν⟩ = 1 + ν`.
pub fn sobolev_norm(c: &SpectralCoeffs, s: f64) -> f64 {
    c.basis()
        .modes()
        .iter()
        .zip(c.values())
        .map(|(m, v)| (1.0 + m.eigenvalue).powf(s) * v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Homogeneous `Ḣ^s` norm `(Σ ν_k^s |c_k|²)^{1/2}`; the zero mode contributes
/// nothing.
pub fn homogeneous_sobolev_norm(c: &SpectralCoeffs, s: f64) -> f64 {
    c.basis()
        .modes()
        .iter()
        .zip(c.values())
        .filter(|(m, _)| m.eigenvalue > 0.0)
        .map(|(m, v)| m.eigenvalue.powf(s) * v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_cutoff_one_and_a_half() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 1.5, 1.0).unwrap();
        assert_eq!(b.len(), 9);
        let freqs: Vec<f64> = b.modes().iter().map(|m| m.frequency).collect();
        assert_eq!(freqs[0], 0.0);
        assert!(freqs[1..5].iter().all(|&f| f == 1.0));
        assert!(freqs[5..].iter().all(|&f| (f - 2f64.sqrt()).abs() < 1e-15));
        assert_eq!(b.modes()[1].label, ModeLabel::Lattice(-1, 0));
    }

    #[test]
    fn sphere_cutoff_two_and_a_half() {
        let b = SpectralBasis::new(ManifoldKind::Sphere, 2.5, 1.0).unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(b.bandwidth(), 2);
    }

    #[test]
    fn rescaled_eigenvalue_appears() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 2.0, 2.0).unwrap();
        let m = &b.modes()[b.index_of(ModeLabel::Lattice(4, 0)).unwrap()];
        assert_eq!(m.eigenvalue, 4.0);
        assert_eq!(m.frequency, 2.0);
        assert!((b.volume() - 16.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_scaling_exact() {
        let base = SpectralBasis::new(ManifoldKind::Sphere, 12.0, 1.0).unwrap();
        for lambda in [0.5, 3.0, 7.25] {
            let scaled = base.rescaled(lambda).unwrap();
            for (a, b) in base.modes().iter().zip(scaled.modes()) {
                assert_eq!(a.label, b.label);
                let back = b.eigenvalue * lambda * lambda;
                assert!((back - a.eigenvalue).abs() <= 1e-14 * a.eigenvalue.max(1.0));
            }
        }
    }

    #[test]
    fn mode_cap_refusal_reports_count() {
        let err = SpectralBasis::with_mode_cap(ManifoldKind::Torus, 100.0, 1.0, 1000).unwrap_err();
        match err {
            Error::ModeCapExceeded { count, cap } => {
                assert!(count > cap);
                assert_eq!(cap, 1000);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn invalid_cutoff_rejected() {
        assert!(SpectralBasis::new(ManifoldKind::Torus, 0.5, 1.0).is_err());
        assert!(SpectralBasis::new(ManifoldKind::Torus, 2.0, 0.0).is_err());
    }

    #[test]
    fn construction_is_deterministic() {
        let a = SpectralBasis::new(ManifoldKind::Torus, 9.3, 1.7).unwrap();
        let b = SpectralBasis::new(ManifoldKind::Torus, 9.3, 1.7).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        for (x, y) in a.modes().iter().zip(b.modes()) {
            assert_eq!(x.label, y.label);
            assert_eq!(x.eigenvalue.to_bits(), y.eigenvalue.to_bits());
        }
    }

    #[test]
    fn dyadic_projection_boundaries() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 5.0, 1.0).unwrap();
        let ones = SpectralCoeffs::new(Arc::clone(&b), vec![Complex64::new(1.0, 0.0); b.len()])
            .unwrap();
        let p2 = dyadic_projection(&ones, 2).unwrap();
        let mut kept: Vec<u64> = b
            .modes()
            .iter()
            .zip(p2.values())
            .filter(|(_, v)| v.re != 0.0)
            .map(|(m, _)| m.label.base_eigenvalue())
            .collect();
        kept.dedup();
        assert_eq!(kept, vec![4, 5, 8, 9, 10, 13]);

        let p1 = dyadic_projection(&ones, 1).unwrap();
        let q = project_interval(&ones, 0.0, 2.0).unwrap();
        assert_eq!(p1.values(), q.values());
    }

    #[test]
    fn sobolev_single_mode() {
        let b = SpectralBasis::new(ManifoldKind::Torus, 6.0, 1.0).unwrap();
        let c = SpectralCoeffs::single_mode(b, ModeLabel::Lattice(3, 4), Complex64::new(1.0, 0.0))
            .unwrap();
        assert!((sobolev_norm(&c, 1.0) - 26f64.sqrt()).abs() < 1e-14);
        assert_eq!(sobolev_norm(&c, 0.0), c.l2_norm());
        assert!((homogeneous_sobolev_norm(&c, 1.0) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn descriptor_round_trips_through_json() {
        let b = SpectralBasis::new(ManifoldKind::Sphere, 4.0, 2.0).unwrap();
        let d = b.descriptor();
        let text = serde_json::to_string(&d).unwrap();
        let back: BasisDescriptor = serde_json::from_str(&text).unwrap();
        assert_eq!(d, back);
        assert_eq!(back.mode_count, b.len());
    }

    #[test]
    fn conjugate_labels() {
        assert_eq!(
            ModeLabel::Harmonic { l: 3, m: -1 }.conjugate(),
            (ModeLabel::Harmonic { l: 3, m: 1 }, -1.0)
        );
        assert_eq!(
            ModeLabel::Lattice(2, -5).conjugate(),
            (ModeLabel::Lattice(-2, 5), 1.0)
        );
    }
}
