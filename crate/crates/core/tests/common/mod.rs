//! Independent reference computations for the integration tests.
//!
//! Nothing here goes through the library's transforms or quadrature grids;
//! everything is evaluated from explicit formulas over mode labels.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use surface_nls::spectra::{ManifoldKind, ModeLabel, SpectralCoeffs};

pub fn lattice(label: ModeLabel) -> [i32; 2] {
    match label {
        ModeLabel::Lattice(x, y) => [x, y],
        ModeLabel::Harmonic { .. } => panic!("torus label expected"),
    }
}

/// Eigenvalue of `-Δ` on the dilated surface, from the label alone.
pub fn eigenvalue(label: ModeLabel, scale: f64) -> f64 {
    let base = match label {
        ModeLabel::Lattice(x, y) => (x * x + y * y) as f64,
        ModeLabel::Harmonic { l, .. } => (l * (l + 1)) as f64,
    };
    base / (scale * scale)
}

/// Nonzero coefficients keyed by lattice frequency.
fn lattice_map(c: &SpectralCoeffs, conj: bool) -> HashMap<[i32; 2], Complex64> {
    let mut out = HashMap::new();
    for (m, v) in c.basis().modes().iter().zip(c.values()) {
        if v.norm_sqr() == 0.0 {
            continue;
        }
        let [x, y] = lattice(m.label);
        if conj {
            out.insert([-x, -y], v.conj());
        } else {
            out.insert([x, y], *v);
        }
    }
    out
}

/// `∫ Π fᵢ` on the torus of scale `λ` by explicit convolution of the
/// coefficient sequences: `∫ Π e_{ξᵢ} = δ(Σξ) (2πλ)^{2-k}`. A `true` flag
/// conjugates the factor.
pub fn torus_correlation(factors: &[(&SpectralCoeffs, bool)]) -> Complex64 {
    let scale = factors[0].0.basis().scale();
    let mut acc: HashMap<[i32; 2], Complex64> = HashMap::new();
    acc.insert([0, 0], Complex64::new(1.0, 0.0));
    for (c, conj) in factors {
        let f = lattice_map(c, *conj);
        let mut next: HashMap<[i32; 2], Complex64> = HashMap::new();
        for (a, va) in &acc {
            for (b, vb) in &f {
                *next.entry([a[0] + b[0], a[1] + b[1]]).or_default() += va * vb;
            }
        }
        acc = next;
    }
    let k = factors.len() as i32;
    acc.get(&[0, 0]).copied().unwrap_or_default() * (2.0 * PI * scale).powi(2 - k)
}

/// `‖e^{itΔ}u₀ e^{itΔ}v₀‖_{L²([0,T] × T²_λ)}` in closed form: group the
/// products by output frequency and integrate every phase difference
/// exactly in time.
pub fn bilinear_closed_form(u0: &SpectralCoeffs, v0: &SpectralCoeffs, t: f64) -> f64 {
    let scale = u0.basis().scale();
    let u: Vec<([i32; 2], Complex64, f64)> = u0
        .basis()
        .modes()
        .iter()
        .zip(u0.values())
        .filter(|(_, v)| v.norm_sqr() > 0.0)
        .map(|(m, v)| (lattice(m.label), *v, eigenvalue(m.label, scale)))
        .collect();
    let v: Vec<([i32; 2], Complex64, f64)> = v0
        .basis()
        .modes()
        .iter()
        .zip(v0.values())
        .filter(|(_, v)| v.norm_sqr() > 0.0)
        .map(|(m, v)| (lattice(m.label), *v, eigenvalue(m.label, scale)))
        .collect();
    let mut groups: HashMap<[i32; 2], Vec<(Complex64, f64)>> = HashMap::new();
    for (a, ca, na) in &u {
        for (b, cb, nb) in &v {
            groups
                .entry([a[0] + b[0], a[1] + b[1]])
                .or_default()
                .push((ca * cb, na + nb));
        }
    }
    let time_integral = |d: f64| -> Complex64 {
        if d.abs() * t < 1e-8 {
            Complex64::new(t, -0.5 * d * t * t)
        } else {
            (Complex64::from_polar(1.0, -d * t) - 1.0) / Complex64::new(0.0, -d)
        }
    };
    let mut total = 0.0;
    for pairs in groups.values() {
        for (ap, wp) in pairs {
            for (aq, wq) in pairs {
                total += (ap * aq.conj() * time_integral(wp - wq)).re;
            }
        }
    }
    (total / (2.0 * PI * scale).powi(2)).max(0.0).sqrt()
}

/// `(Σ (1+ν)^s |c|²)^{1/2}` with `ν` recomputed from the labels.
pub fn sobolev(c: &SpectralCoeffs, s: f64) -> f64 {
    let scale = c.basis().scale();
    c.basis()
        .modes()
        .iter()
        .zip(c.values())
        .map(|(m, v)| (1.0 + eigenvalue(m.label, scale)).powf(s) * v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: i64, k: i64) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Associated Legendre `P_l^m(x)`, `m ≥ 0`, with the Condon–Shortley
/// phase, from the explicit power series of `P_l` differentiated `m` times.
pub fn assoc_legendre(l: i64, m: i64, x: f64) -> f64 {
    let mut deriv = 0.0;
    for k in 0..=l / 2 {
        let power = l - 2 * k;
        if power < m {
            continue;
        }
        let coef = if k % 2 == 0 { 1.0 } else { -1.0 } * binomial(l, k) * binomial(2 * l - 2 * k, l);
        let falling = factorial(power) / factorial(power - m);
        deriv += coef * falling * x.powi((power - m) as i32);
    }
    deriv /= 2f64.powi(l as i32);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    sign * (1.0 - x * x).powf(m as f64 / 2.0) * deriv
}

/// Orthonormal `Y_l^m(θ, φ)` on the unit sphere.
pub fn ylm(l: i64, m: i64, theta: f64, phi: f64) -> Complex64 {
    let am = m.abs();
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - am) / factorial(l + am)).sqrt();
    let y = Complex64::from_polar(norm * assoc_legendre(l, am, theta.cos()), am as f64 * phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Eigenfunction of the basis at a point, in the library's coordinates.
pub fn eigenfunction(kind: ManifoldKind, label: ModeLabel, scale: f64, p: (f64, f64)) -> Complex64 {
    match (kind, label) {
        (ManifoldKind::Torus, ModeLabel::Lattice(x, y)) => {
            Complex64::from_polar(1.0, (x as f64 * p.0 + y as f64 * p.1) / scale) / (2.0 * PI * scale)
        }
        (ManifoldKind::Sphere, ModeLabel::Harmonic { l, m }) => ylm(l as i64, m as i64, p.0, p.1) / scale,
        _ => panic!("label does not match manifold"),
    }
}

/// Wigner 3j symbol by the Racah formula.
pub fn wigner_3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    let triangle = factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3)
        / factorial(j1 + j2 + j3 + 1);
    let pre = (triangle
        * factorial(j1 + m1)
        * factorial(j1 - m1)
        * factorial(j2 + m2)
        * factorial(j2 - m2)
        * factorial(j3 + m3)
        * factorial(j3 - m3))
    .sqrt();
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign
            / (factorial(k)
                * factorial(j1 + j2 - j3 - k)
                * factorial(j1 - m1 - k)
                * factorial(j2 + m2 - k)
                * factorial(j3 - j2 + m1 + k)
                * factorial(j3 - j1 - m2 + k));
    }
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * pre * sum
}

/// `∫_{S²} Y_{l1}^{m1} Y_{l2}^{m2} conj(Y_L^M)` on the unit sphere.
pub fn gaunt(l1: i64, m1: i64, l2: i64, m2: i64, l: i64, m: i64) -> f64 {
    // conj(Y_L^M) = (-1)^M Y_L^{-M}
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * ((2 * l1 + 1) as f64 * (2 * l2 + 1) as f64 * (2 * l + 1) as f64 / (4.0 * PI)).sqrt()
        * wigner_3j(l1, l2, l, 0, 0, 0)
        * wigner_3j(l1, l2, l, m1, m2, -m)
}

/// Simple deterministic generator for oracle inputs, independent of the
/// library's seeding.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed ^ 0x9E37_79B9_7F4A_7C15)
    }

    pub fn uniform(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
        ((self.0 >> 11) as f64) / (1u64 << 53) as f64
    }

    /// Roughly standard normal (Box–Muller).
    pub fn normal(&mut self) -> f64 {
        let u = self.uniform().max(1e-300);
        let v = self.uniform();
        (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
    }

    pub fn complex(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal())
    }
}
