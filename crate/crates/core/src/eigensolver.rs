//! Dense complex non-symmetric eigensolver.
//!
//! Pipeline: diagonal balancing by powers of two, Householder reduction to
//! upper Hessenberg form, single-shift complex QR with Wilkinson shifts on
//! the active window, and inverse iteration for eigenvectors.
//!
//! Eigenvectors are computed by inverse iteration on the Hessenberg form of
//! the balanced matrix (an `O(n²)` solve per eigenvalue) and mapped back
//! through the Householder reflectors and the balancing scale. Residuals are
//! always measured against the caller's original matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, CMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const RADIX: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Total QR sweeps allowed are `max_iter_factor · max(L, 10)`.
    pub max_iter_factor: usize,
    /// Exceptional shift every this many stalled sweeps.
    pub exceptional_every: usize,
    /// Residual `‖Mv − λv‖ / ‖M‖_F` above which a vector is flagged.
    pub residual_tol: f64,
    /// Relative perturbation of the shift used by inverse iteration.
    pub shift_perturbation: f64,
    /// Maximum inverse-iteration solves per eigenvalue.
    pub max_inverse_steps: usize,
    /// Eigenvalues within `cluster_tol · ‖H‖_F` of each other are treated as
    /// one degenerate eigenvalue; their vectors are made mutually orthogonal.
    pub cluster_tol: f64,
    pub balance: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            max_iter_factor: 30,
            exceptional_every: 10,
            residual_tol: 1e-8,
            shift_perturbation: 1e-10,
            max_inverse_steps: 3,
            cluster_tol: 1e-12,
            balance: true,
        }
    }
}

/// Eigenvalues, optionally with unit eigenvectors and residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
    pub vectors: Option<Vec<Vec<Complex64>>>,
    pub residuals: Option<Vec<f64>>,
    /// Indices whose inverse iteration stagnated above the residual tolerance.
    #[serde(default)]
    pub defective: Vec<usize>,
}

impl Spectrum {
    pub fn from_values(values: Vec<Complex64>) -> Self {
        Spectrum {
            values,
            vectors: None,
            residuals: None,
            defective: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the eigenvalue closest to `target`.
    pub fn nearest(&self, target: Complex64) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
            .map(|(i, _)| i)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Fails with the first flagged eigenvalue, if any.
    pub fn check_residuals(&self) -> Result<()> {
        match (self.defective.first(), &self.residuals) {
            (Some(&index), Some(res)) => Err(Error::DefectivePair {
                index,
                residual: res[index],
            }),
            _ => Ok(()),
        }
    }

    /// CSV with header `re,im,residual`; residual is `NaN` when not computed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,residual\n");
        for (i, z) in self.values.iter().enumerate() {
            let r = self.residuals.as_ref().map_or(f64::NAN, |r| r[i]);
            out.push_str(&format!("{},{},{}\n", z.re, z.im, r));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serializes")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = crate::io::read_csv(text, &["re", "im", "residual"])?;
        let values = rows.iter().map(|r| Complex64::new(r[0], r[1])).collect();
        let residuals: Vec<f64> = rows.iter().map(|r| r[2]).collect();
        let residuals = if residuals.iter().all(|r| r.is_nan()) {
            None
        } else {
            Some(residuals)
        };
        Ok(Spectrum {
            values,
            vectors: None,
            residuals,
            defective: Vec::new(),
        })
    }
}

/// Balancing, Hessenberg form and reflectors of one input matrix.
struct Reduction {
    scale: Vec<f64>,
    hess: CMatrix,
    /// Reflector `k` is a unit vector acting on rows/columns `k+1..n`.
    reflectors: Vec<Vec<Complex64>>,
}

impl Reduction {
    fn new(m: &CMatrix, opts: &EigenOptions) -> Self {
        let mut a = m.clone();
        let scale = if opts.balance {
            balance(&mut a)
        } else {
            vec![1.0; a.dim()]
        };
        let reflectors = reduce_to_hessenberg(&mut a);
        Reduction {
            scale,
            hess: a,
            reflectors,
        }
    }

    /// Maps a Hessenberg-basis vector back to the original basis, normalized.
    fn back_transform(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut x = y.to_vec();
        for (k, v) in self.reflectors.iter().enumerate().rev() {
            apply_reflector(v, &mut x[k + 1..]);
        }
        for (xi, s) in x.iter_mut().zip(&self.scale) {
            *xi *= *s;
        }
        let nrm = norm2(&x);
        x.iter_mut().for_each(|z| *z /= nrm);
        x
    }
}

/// Diagonal similarity `D⁻¹ A D` with `D` a power of two per index, reducing
/// the norm imbalance between each row and column. Returns the diagonal of `D`.
fn balance(a: &mut CMatrix) -> Vec<f64> {
    let n = a.dim();
    let mut scale = vec![1.0; n];
    let radix2 = RADIX * RADIX;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm();
                    r += a[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= radix2;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= radix2;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                scale[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            return scale;
        }
    }
}

/// `x ← (I − 2vvᴴ) x` for unit `v`.
fn apply_reflector(v: &[Complex64], x: &mut [Complex64]) {
    let s: Complex64 = v.iter().zip(x.iter()).map(|(vi, xi)| vi.conj() * xi).sum();
    let s2 = s * 2.0;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s2 * vi;
    }
}

fn reduce_to_hessenberg(a: &mut CMatrix) -> Vec<Vec<Complex64>> {
    let n = a.dim();
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = norm2(&v);
        let tail: f64 = v[1..].iter().map(|z| z.norm_sqr()).sum();
        if xnorm == 0.0 || tail == 0.0 {
            reflectors.push(vec![ZERO; n - k - 1]);
            continue;
        }
        let phase = if v[0] == ZERO {
            Complex64::new(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = norm2(&v);
        v.iter_mut().for_each(|z| *z /= vnorm);

        // Left: rows k+1..n, columns k..n.
        let mut s = vec![ZERO; n];
        for (idx, i) in (k + 1..n).enumerate() {
            let vc = v[idx].conj();
            let row = a.row(i);
            for j in k..n {
                s[j] += vc * row[j];
            }
        }
        for (idx, i) in (k + 1..n).enumerate() {
            let vi2 = v[idx] * 2.0;
            let row = a.row_mut(i);
            for j in k..n {
                row[j] -= vi2 * s[j];
            }
        }
        // Right: all rows, columns k+1..n.
        for i in 0..n {
            let row = &mut a.row_mut(i)[k + 1..];
            apply_reflector_row(&v, row);
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
        reflectors.push(v);
    }
    reflectors
}

/// `row ← row (I − 2vvᴴ)` for unit `v`.
fn apply_reflector_row(v: &[Complex64], row: &mut [Complex64]) {
    let t: Complex64 = row.iter().zip(v).map(|(r, vi)| r * vi).sum();
    let t2 = t * 2.0;
    for (r, vi) in row.iter_mut().zip(v) {
        *r -= t2 * vi.conj();
    }
}

/// Rotation `G = [[c, s], [−s̄, c]]` with `G [a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    let an = a.norm();
    let bn = b.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let rho = an.hypot(bn);
    (an / rho, (a / an) * b.conj() / rho)
}

/// Eigenvalue of the trailing 2×2 block nearest its bottom-right entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let bc = b * c;
    let delta = (a - d) * 0.5;
    let disc = (delta * delta + bc).sqrt();
    let plus = delta + disc;
    let minus = delta - disc;
    let denom = if plus.norm() >= minus.norm() { plus } else { minus };
    if denom == ZERO {
        d
    } else {
        d - bc / denom
    }
}

/// One explicit shifted QR step `H − σI = QR`, `H ← RQ + σI` on rows and
/// columns `lo..=hi`.
fn qr_sweep(h: &mut CMatrix, lo: usize, hi: usize, shift: Complex64, rots: &mut Vec<(f64, Complex64)>) {
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    rots.clear();
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        rots.push((c, s));
        let (upper, lower) = h.row_pair_mut(k);
        let (upper, lower) = (&mut upper[k..=hi], &mut lower[k..=hi]);
        for (x, y) in upper.iter_mut().zip(lower.iter_mut()) {
            let (xv, yv) = (*x, *y);
            *x = xv * c + s * yv;
            *y = -s.conj() * xv + yv * c;
        }
        h[(k + 1, k)] = ZERO;
    }
    // Right multiplication acts on each row independently, so apply all
    // rotations row by row; row i only meets rotations k ≥ i − 1.
    for i in lo..=hi {
        let row = h.row_mut(i);
        for k in i.saturating_sub(1).max(lo)..hi {
            let (c, s) = rots[k - lo];
            let x = row[k];
            let y = row[k + 1];
            row[k] = x * c + s.conj() * y;
            row[k + 1] = -s * x + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Eigenvalues of an upper Hessenberg matrix, in Schur-diagonal order.
fn hessenberg_eigenvalues(mut h: CMatrix, opts: &EigenOptions) -> Result<Vec<Complex64>> {
    let n = h.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let eps = f64::EPSILON;
    let hnorm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let max_total = opts.max_iter_factor * n.max(10);
    let mut total = 0usize;
    let mut stalled = 0usize;
    let mut rots = Vec::with_capacity(n);
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = hnorm;
            }
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            stalled = 0;
            continue;
        }
        if total >= max_total {
            return Err(Error::NoConvergence { index: hi });
        }
        total += 1;
        stalled += 1;
        let shift = if stalled % opts.exceptional_every == 0 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, lo, hi, shift, &mut rots);
    }
    Ok(h.diagonal())
}

fn check_input(m: &CMatrix) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    Ok(())
}

pub fn eigenvalues(m: &CMatrix) -> Result<Spectrum> {
    eigenvalues_with(m, &EigenOptions::default())
}

pub fn eigenvalues_with(m: &CMatrix, opts: &EigenOptions) -> Result<Spectrum> {
    check_input(m)?;
    let red = Reduction::new(m, opts);
    Ok(Spectrum::from_values(hessenberg_eigenvalues(red.hess, opts)?))
}

/// LU of `H − μI` for upper Hessenberg `H`, pivoting only between
/// neighbouring rows. Zero pivots are replaced by `tiny`.
struct HessenbergLu {
    u: CMatrix,
    swapped: Vec<bool>,
    mult: Vec<Complex64>,
}

impl HessenbergLu {
    fn new(n: usize) -> Self {
        HessenbergLu {
            u: CMatrix::zeros(n),
            swapped: vec![false; n],
            mult: vec![ZERO; n],
        }
    }

    fn factor(&mut self, h: &CMatrix, mu: Complex64, tiny: f64) {
        let n = h.dim();
        for i in 0..n {
            let lo = i.saturating_sub(1);
            let (src, dst) = (h.row(i), self.u.row_mut(i));
            dst[..lo].iter_mut().for_each(|z| *z = ZERO);
            dst[lo..].copy_from_slice(&src[lo..]);
            dst[i] -= mu;
        }
        for k in 0..n.saturating_sub(1) {
            let swap = self.u[(k + 1, k)].norm() > self.u[(k, k)].norm();
            self.swapped[k] = swap;
            if swap {
                for j in k..n {
                    let t = self.u[(k, j)];
                    self.u[(k, j)] = self.u[(k + 1, j)];
                    self.u[(k + 1, j)] = t;
                }
            }
            if self.u[(k, k)] == ZERO {
                self.u[(k, k)] = Complex64::new(tiny, 0.0);
            }
            let m = self.u[(k + 1, k)] / self.u[(k, k)];
            self.mult[k] = m;
            self.u[(k + 1, k)] = ZERO;
            if m != ZERO {
                for j in k + 1..n {
                    let ukj = self.u[(k, j)];
                    self.u[(k + 1, j)] -= m * ukj;
                }
            }
        }
        if n > 0 && self.u[(n - 1, n - 1)] == ZERO {
            self.u[(n - 1, n - 1)] = Complex64::new(tiny, 0.0);
        }
    }

    fn solve(&self, b: &mut [Complex64]) {
        let n = b.len();
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                b.swap(k, k + 1);
            }
            let bk = b[k];
            b[k + 1] -= self.mult[k] * bk;
        }
        for i in (0..n).rev() {
            let row = self.u.row(i);
            let mut s = b[i];
            for j in i + 1..n {
                s -= row[j] * b[j];
            }
            b[i] = s / row[i];
        }
    }
}

fn residual(m: &CMatrix, mnorm: f64, lambda: Complex64, v: &[Complex64]) -> f64 {
    let mv = m.matvec(v);
    let r: f64 = mv
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    r / mnorm
}

/// Rotates `v` so its largest-modulus component is real and positive.
fn fix_phase(v: &mut [Complex64]) {
    let big = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(ZERO);
    if big != ZERO {
        let phase = big.conj() / big.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

struct InverseIteration<'a> {
    m: &'a CMatrix,
    mnorm: f64,
    red: &'a Reduction,
    lu: HessenbergLu,
    opts: &'a EigenOptions,
}

impl<'a> InverseIteration<'a> {
    fn new(m: &'a CMatrix, red: &'a Reduction, opts: &'a EigenOptions) -> Self {
        InverseIteration {
            m,
            mnorm: m.frobenius_norm().max(f64::MIN_POSITIVE),
            red,
            lu: HessenbergLu::new(m.dim()),
            opts,
        }
    }

    /// Returns the unit eigenvector, its residual and its Hessenberg-basis
    /// image. `cluster` holds the Hessenberg-basis vectors already found for
    /// numerically equal eigenvalues; the new vector is kept orthogonal to them.
    fn vector(&mut self, lambda: Complex64, cluster: &[Vec<Complex64>]) -> (Vec<Complex64>, f64, Vec<Complex64>) {
        let n = self.m.dim();
        let hnorm = self.red.hess.frobenius_norm().max(f64::MIN_POSITIVE);
        let mu = lambda + self.opts.shift_perturbation * hnorm;
        self.lu.factor(&self.red.hess, mu, f64::EPSILON * hnorm);
        let mut y: Vec<Complex64> = if cluster.is_empty() {
            vec![Complex64::new(1.0, 0.0); n]
        } else {
            let turn = GOLDEN_TURN * (cluster.len() + 1) as f64;
            (0..n).map(|i| Complex64::from_polar(1.0, turn * (i + 1) as f64)).collect()
        };
        orthogonalize(&mut y, cluster);
        let mut best = (Vec::new(), f64::INFINITY, Vec::new());
        for step in 0..self.opts.max_inverse_steps.max(2) {
            self.lu.solve(&mut y);
            orthogonalize(&mut y, cluster);
            let nrm = norm2(&y);
            if !nrm.is_finite() || nrm == 0.0 {
                break;
            }
            y.iter_mut().for_each(|z| *z /= nrm);
            // The first solve leaves O(shift perturbation) admixtures of
            // other eigenvectors; the second removes them.
            if step == 0 {
                continue;
            }
            let mut v = self.red.back_transform(&y);
            fix_phase(&mut v);
            let r = residual(self.m, self.mnorm, lambda, &v);
            if r < best.1 {
                best = (v, r, y.clone());
            }
            if best.1 <= self.opts.residual_tol {
                break;
            }
        }
        if best.0.is_empty() {
            best.0 = vec![ZERO; n];
            best.0[0] = Complex64::new(1.0, 0.0);
            best.2 = best.0.clone();
        }
        best
    }
}

/// Start-vector phase increment, `2π` times the golden ratio conjugate.
const GOLDEN_TURN: f64 = std::f64::consts::TAU * crate::model::GOLDEN_ALPHA;

/// Two passes of Gram–Schmidt against unit vectors `basis`.
fn orthogonalize(y: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for b in basis {
            let dot: Complex64 = b.iter().zip(y.iter()).map(|(bi, yi)| bi.conj() * yi).sum();
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi -= dot * bi;
            }
        }
    }
}

pub fn eigenpairs(m: &CMatrix) -> Result<Spectrum> {
    eigenpairs_with(m, &EigenOptions::default())
}

pub fn eigenpairs_with(m: &CMatrix, opts: &EigenOptions) -> Result<Spectrum> {
    check_input(m)?;
    let red = Reduction::new(m, opts);
    let values = hessenberg_eigenvalues(red.hess.clone(), opts)?;
    let mut inv = InverseIteration::new(m, &red, opts);
    let cluster_radius = opts.cluster_tol * red.hess.frobenius_norm();
    let mut vectors = Vec::with_capacity(values.len());
    let mut residuals = Vec::with_capacity(values.len());
    let mut images: Vec<Vec<Complex64>> = Vec::with_capacity(values.len());
    let mut defective = Vec::new();
    for (i, &lambda) in values.iter().enumerate() {
        let cluster: Vec<Vec<Complex64>> = (0..i)
            .filter(|&j| (values[j] - lambda).norm() <= cluster_radius)
            .map(|j| images[j].clone())
            .collect();
        let (v, r, y) = inv.vector(lambda, &cluster);
        if r > opts.residual_tol {
            defective.push(i);
        }
        vectors.push(v);
        residuals.push(r);
        images.push(y);
    }
    Ok(Spectrum {
        values,
        vectors: Some(vectors),
        residuals: Some(residuals),
        defective,
    })
}

/// A single eigenpair nearest `target`, plus the full set of eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub index: usize,
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub spectrum: Spectrum,
}

pub fn eigenpair_near(m: &CMatrix, target: Complex64) -> Result<Eigenpair> {
    let opts = EigenOptions::default();
    check_input(m)?;
    let red = Reduction::new(m, &opts);
    let spectrum = Spectrum::from_values(hessenberg_eigenvalues(red.hess.clone(), &opts)?);
    let index = spectrum.nearest(target).ok_or(Error::EmptySet)?;
    let value = spectrum.values[index];
    let (vector, residual, _) = InverseIteration::new(m, &red, &opts).vector(value, &[]);
    Ok(Eigenpair {
        index,
        value,
        vector,
        residual,
        spectrum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_matrix() {
        let m = CMatrix::from_diagonal(&[c(1.0, 2.0), c(3.0, 0.0)]);
        let vals = sorted(eigenvalues(&m).unwrap().values);
        assert!((vals[0] - c(1.0, 2.0)).norm() < 1e-14);
        assert!((vals[1] - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn swap_matrix() {
        let m = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let vals = sorted(eigenvalues(&m).unwrap().values);
        assert!((vals[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((vals[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn trivial_sizes() {
        assert!(eigenvalues(&CMatrix::zeros(0)).unwrap().is_empty());
        let one = CMatrix::from_diagonal(&[c(2.0, -1.0)]);
        assert_eq!(eigenvalues(&one).unwrap().values, vec![c(2.0, -1.0)]);
        let pairs = eigenpairs(&one).unwrap();
        assert_eq!(pairs.vectors.unwrap()[0], vec![c(1.0, 0.0)]);
    }

    #[test]
    fn non_finite_input_rejected() {
        let m = CMatrix::from_diagonal(&[c(f64::NAN, 0.0), c(1.0, 0.0)]);
        assert!(matches!(eigenvalues(&m), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn diagonal_eigenvectors_are_standard_basis() {
        let m = CMatrix::from_diagonal(&[c(5.0, 0.0), c(0.0, 7.0)]);
        let s = eigenpairs(&m).unwrap();
        for (lambda, v) in s.values.iter().zip(s.vectors.as_ref().unwrap()) {
            let k = if (lambda - c(5.0, 0.0)).norm() < 1e-12 { 0 } else { 1 };
            assert!((v[k] - c(1.0, 0.0)).norm() < 1e-12);
            assert!(v[1 - k].norm() < 1e-12);
        }
        assert!(s.defective.is_empty());
    }

    #[test]
    fn nearly_defective_two_by_two() {
        // Eigenvalues 1 and 1 + 1e-4; closed-form vectors (1, 0) and (1, 1e-4)/‖·‖.
        let m = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0 + 1e-4, 0.0)]]).unwrap();
        let s = eigenpairs(&m).unwrap();
        let vecs = s.vectors.as_ref().unwrap();
        for (i, lambda) in s.values.iter().enumerate() {
            assert!(s.residuals.as_ref().unwrap()[i] <= 1e-8);
            let expected = if (lambda - c(1.0, 0.0)).norm() < 1e-8 {
                vec![c(1.0, 0.0), c(0.0, 0.0)]
            } else {
                let nrm = (1.0f64 + 1e-8).sqrt();
                vec![c(1.0 / nrm, 0.0), c(1e-4 / nrm, 0.0)]
            };
            for (a, b) in vecs[i].iter().zip(&expected) {
                assert!((a - b).norm() < 1e-8, "{:?} vs {:?}", vecs[i], expected);
            }
        }
    }

    #[test]
    fn hessenberg_reduction_is_a_similarity() {
        let n = 7;
        let m = CMatrix::from_fn(n, |i, j| c(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + 2 * j) % 5) as f64 * 0.5));
        let opts = EigenOptions {
            balance: false,
            ..EigenOptions::default()
        };
        let red = Reduction::new(&m, &opts);
        for i in 0..n {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(red.hess[(i, j)], ZERO);
            }
        }
        assert!((red.hess.trace() - m.trace()).norm() < 1e-12);
        assert!((red.hess.frobenius_norm() - m.frobenius_norm()).abs() < 1e-12);
    }

    #[test]
    fn balancing_preserves_spectrum_of_badly_scaled_matrix() {
        let m = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1e6, 0.0), c(0.0, 0.0)],
            vec![c(1e-6, 0.0), c(2.0, 0.0), c(1e5, 1.0)],
            vec![c(0.0, 0.0), c(1e-5, 0.0), c(3.0, 0.0)],
        ])
        .unwrap();
        let s = eigenpairs(&m).unwrap();
        let sum: Complex64 = s.values.iter().sum();
        assert!((sum - m.trace()).norm() < 1e-10);
        assert!(s.residuals.unwrap().iter().all(|&r| r < 1e-10));
    }

    #[test]
    fn eigenvectors_are_unit_and_phase_fixed() {
        let n = 9;
        let m = CMatrix::from_fn(n, |i, j| c(((i * 5 + j * 2) % 7) as f64 * 0.3, ((i * j) % 3) as f64 - 1.0));
        let s = eigenpairs(&m).unwrap();
        for v in s.vectors.as_ref().unwrap() {
            assert!((norm2(v) - 1.0).abs() < 1e-12);
            let big = v.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
            assert!(big.im.abs() < 1e-14 && big.re > 0.0);
        }
        assert!(s.residuals.unwrap().iter().all(|&r| r <= 1e-8));
    }

    #[test]
    fn csv_round_trip() {
        let s = Spectrum::from_values(vec![c(1.5, -0.25), c(-2.0, 3.0)]);
        let back = Spectrum::from_csv(&s.to_csv()).unwrap();
        assert_eq!(back.values, s.values);
        assert!(back.residuals.is_none());
        let json: Spectrum = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(json, s);
    }

    #[test]
    fn check_residuals_reports_flagged_index() {
        let s = Spectrum {
            values: vec![c(0.0, 0.0), c(1.0, 0.0)],
            vectors: None,
            residuals: Some(vec![1e-12, 1e-3]),
            defective: vec![1],
        };
        assert_eq!(
            s.check_residuals(),
            Err(Error::DefectivePair {
                index: 1,
                residual: 1e-3
            })
        );
    }
}
