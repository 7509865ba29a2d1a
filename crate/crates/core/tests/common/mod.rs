//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the crate's numerical code: matrices are plain
//! row vectors, determinants come from a separate Gaussian elimination and
//! eigenvalues from polynomial root finding.
#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64 as C;
use rand_core::RngCore;
use rand_xoshiro::SplitMix64;

pub type Rows = Vec<Vec<C>>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Uniform on `[-1, 1)`.
pub fn uniform(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

pub fn random_rows(rng: &mut SplitMix64, n: usize) -> Rows {
    (0..n)
        .map(|_| (0..n).map(|_| c(uniform(rng), uniform(rng))).collect())
        .collect()
}

pub fn matmul(a: &Rows, b: &Rows) -> Rows {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &Rows) -> C {
    let n = a.len();
    let mut m = a.clone();
    let mut d = c(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm())).unwrap();
        if m[p][k].norm() == 0.0 {
            return c(0.0, 0.0);
        }
        if p != k {
            m.swap(p, k);
            d = -d;
        }
        d *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let t = m[k][j];
                m[i][j] -= f * t;
            }
        }
    }
    d
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn inverse(a: &Rows) -> Rows {
    let n = a.len();
    let mut m: Rows = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }));
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm())).unwrap();
        m.swap(p, k);
        let piv = m[k][k];
        m[k].iter_mut().for_each(|x| *x /= piv);
        for i in 0..n {
            if i != k {
                let f = m[i][k];
                for j in 0..2 * n {
                    let t = m[k][j];
                    m[i][j] -= f * t;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn trace(a: &Rows) -> C {
    (0..a.len()).map(|i| a[i][i]).sum()
}

fn shifted(a: &Rows, z: C) -> Rows {
    let mut m = a.clone();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= z;
    }
    m
}

/// Coefficients of the monic characteristic polynomial `det(zI − A)` in the
/// variable `μ = (z − center)/radius`, lowest degree first, obtained by
/// interpolating determinants on the unit circle in `μ`.
pub fn char_poly(a: &Rows, center: C, radius: f64) -> Vec<C> {
    let n = a.len();
    let pts = n + 1;
    let values: Vec<C> = (0..pts)
        .map(|j| {
            let mu = C::from_polar(1.0, TAU * j as f64 / pts as f64);
            let z = center + mu * radius;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            det(&shifted(a, z)) * sign
        })
        .collect();
    (0..pts)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(j, v)| v * C::from_polar(1.0, -TAU * (j * k) as f64 / pts as f64))
                .sum::<C>()
                / pts as f64
        })
        .collect()
}

fn horner(coeffs: &[C], z: C) -> (C, C) {
    let mut p = c(0.0, 0.0);
    let mut dp = c(0.0, 0.0);
    for a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Aberth–Ehrlich simultaneous iteration given a Newton correction.
fn aberth(mut z: Vec<C>, mut newton: impl FnMut(C) -> C, iters: usize) -> Vec<C> {
    for _ in 0..iters {
        let mut moved: f64 = 0.0;
        for k in 0..z.len() {
            let n = newton(z[k]);
            if !n.is_finite() || n.norm() == 0.0 {
                continue;
            }
            let s: C = (0..z.len()).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = n / (1.0 - n * s);
            z[k] -= w;
            moved = moved.max(w.norm() / (1.0 + z[k].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Roots of `Σ coeffs[k] z^k` (leading coefficient non-zero).
pub fn poly_roots(coeffs: &[C]) -> Vec<C> {
    let n = coeffs.len() - 1;
    let start = (0..n)
        .map(|k| C::from_polar(1.0, TAU * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    aberth(start, |z| {
        let (p, dp) = horner(coeffs, z);
        p / dp
    }, 1000)
}

/// Eigenvalues as roots of the characteristic polynomial, polished by
/// Aberth steps on `det(A − zI)` itself (Newton correction `−1/tr((A−zI)⁻¹)`).
pub fn eigenvalues_oracle(a: &Rows) -> Vec<C> {
    let n = a.len();
    let center = trace(a) / n as f64;
    let fro: f64 = a.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let radius = fro.max(1e-300);
    let roots: Vec<C> = poly_roots(&char_poly(a, center, radius))
        .into_iter()
        .map(|mu| center + mu * radius)
        .collect();
    aberth(roots, |z| -1.0 / trace(&inverse(&shifted(a, z))), 8)
}

/// Symmetric Hausdorff distance by brute force.
pub fn hausdorff(a: &[C], b: &[C]) -> f64 {
    let directed = |x: &[C], y: &[C]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Midpoint rule for `(1/2π) ∫ ln|E − 2cos k| dk`.
pub fn dini_midpoint(e: C, points: usize) -> f64 {
    (0..points)
        .map(|j| {
            let k = TAU * (j as f64 + 0.5) / points as f64;
            (e - 2.0 * k.cos()).norm().ln()
        })
        .sum::<f64>()
        / points as f64
}

/// Larger-modulus root `w` of `w² − Ew + 1 = 0`.
pub fn joukowski_outer(e: C) -> C {
    let s = (e * e - 4.0).sqrt();
    let (a, b) = ((e + s) / 2.0, (e - s) / 2.0);
    if a.norm() >= b.norm() { a } else { b }
}

/// The exponential ring written out entry by entry from the recursion
/// `ψ_{n+1} + ψ_{n−1} + V e^{i(θ − 2π p n / q)} ψ_n = E ψ_n`, sites `n = 1..L`.
pub fn exp_ring_rows(v: f64, p: u64, q: u64, theta: f64, periodic: bool, len: usize) -> Rows {
    let mut m = vec![vec![c(0.0, 0.0); len]; len];
    for i in 0..len {
        let n = (i + 1) as f64;
        let phase = theta - TAU * ((p as f64 * n) % q as f64) / q as f64;
        m[i][i] = C::from_polar(v, phase);
        if i + 1 < len {
            m[i][i + 1] = c(1.0, 0.0);
            m[i + 1][i] = c(1.0, 0.0);
        }
    }
    if periodic && len > 2 {
        m[0][len - 1] += c(1.0, 0.0);
        m[len - 1][0] += c(1.0, 0.0);
    }
    m
}
