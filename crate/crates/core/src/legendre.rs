//! Gauss–Legendre rules and orthonormal associated Legendre tables.

use std::f64::consts::PI;

/// Nodes (ascending) and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi's initial guess, descending from 1.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for iter in 0..100 {
            let (p, d) = legendre_p_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 && iter > 2 {
                break;
            }
        }
        let (_, d) = legendre_p_and_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = weight;
        w[i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_p_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Position of `(l, m)`, `0 <= m <= l`, in a packed triangular table.
#[inline]
pub fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

pub fn tri_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// Fills `out` with `P̄_l^m(x)` for `0 <= m <= l <= lmax`, normalized so that
/// `Y_l^m(θ, φ) = P̄_l^m(cos θ) e^{imφ}` is orthonormal on the unit sphere,
/// Condon–Shortley phase included.
pub fn normalized_legendre(lmax: usize, x: f64, out: &mut [f64]) {
    assert!(out.len() >= tri_len(lmax));
    let sin_t = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_t;
        }
        out[tri_index(m, m)] = pmm;
        if m == lmax {
            break;
        }
        let mf = m as f64;
        let mut prev = pmm;
        let mut cur = (2.0 * mf + 3.0).sqrt() * x * pmm;
        out[tri_index(m + 1, m)] = cur;
        let mut a_prev = (2.0 * mf + 3.0).sqrt();
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let next = a * (x * cur - prev / a_prev);
            out[tri_index(l, m)] = next;
            prev = cur;
            cur = next;
            a_prev = a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 17, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for k in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} k={k}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn low_degree_closed_forms() {
        let x = 0.3_f64;
        let s = (1.0 - x * x).sqrt();
        let mut t = vec![0.0; tri_len(2)];
        normalized_legendre(2, x, &mut t);
        let c = |v: f64| v / (4.0 * PI).sqrt();
        assert!((t[tri_index(0, 0)] - c(1.0)).abs() < 1e-15);
        assert!((t[tri_index(1, 0)] - c(3f64.sqrt() * x)).abs() < 1e-15);
        assert!((t[tri_index(1, 1)] - c(-(1.5f64).sqrt() * s)).abs() < 1e-15);
        assert!((t[tri_index(2, 0)] - c(5f64.sqrt() * 0.5 * (3.0 * x * x - 1.0))).abs() < 1e-15);
        assert!((t[tri_index(2, 2)] - c(0.25 * 30f64.sqrt() * s * s)).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_columns() {
        let lmax = 40;
        let (x, w) = gauss_legendre(lmax + 1);
        let tables: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let mut t = vec![0.0; tri_len(lmax)];
                normalized_legendre(lmax, xi, &mut t);
                t
            })
            .collect();
        for m in [0usize, 3, 17] {
            for l1 in m..=lmax {
                for l2 in m..=lmax {
                    let ip: f64 = tables
                        .iter()
                        .zip(&w)
                        .map(|(t, wi)| wi * t[tri_index(l1, m)] * t[tri_index(l2, m)])
                        .sum::<f64>()
                        * 2.0
                        * PI;
                    let expect = if l1 == l2 { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-12, "m={m} l1={l1} l2={l2}: {ip}");
                }
            }
        }
    }
}
