//! Fourier duality between position and momentum space.
//!
//! With `ψ_n = L^{-1/2} Σ_k φ_k e^{−2πiαnk}` the exponential model becomes
//! `2cos(2παk) φ_k + V e^{iθ} φ_{k−1} = E φ_k`. The gauge `φ_k = e^{ikθ} χ_k`
//! removes the phase everywhere except the ring closure, which picks up
//! `e^{iLθ}`. Dividing by `V` gives [`build_dual_exp`], whose eigenvalues are
//! `E / V`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Boundary, Hamiltonian, ModelKind, ModelSpec, GOLDEN_ALPHA};
use crate::transfer::{mean_stderr, Frequency, LyapunovEstimate, Method};

/// Smallest `|E − 2cos(2παk)|` accepted by the momentum product.
pub const RESONANCE_TOLERANCE: f64 = 1e-12;
/// Smallest `|b_k|` accepted by the tangent dual recursion.
pub const DIVISION_TOLERANCE: f64 = 1e-12;
pub const MIN_MOMENTUM_TERMS: usize = 1_000;
pub const DEFAULT_QUADRATURE_POINTS: usize = 10_000;
/// Log singularities closer than this to a quadrature node are rejected.
const QUADRATURE_GUARD: f64 = 1e-10;
const BLOCKS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub amplitudes: Vec<Complex64>,
    pub norm: f64,
}

impl DualState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        let norm = crate::linalg::norm2(&amplitudes);
        DualState { amplitudes, norm }
    }

    /// Rescales to unit norm; fails for the zero state.
    pub fn normalized(mut self) -> Result<Self> {
        if self.norm == 0.0 {
            return Err(Error::ZeroState);
        }
        let n = self.norm;
        self.amplitudes.iter_mut().for_each(|z| *z /= n);
        self.norm = 1.0;
        Ok(self)
    }
}

fn roots_of_unity(q: u64) -> Vec<Complex64> {
    (0..q).map(|r| Complex64::from_polar(1.0, TAU * r as f64 / q as f64)).collect()
}

fn check_size(len: usize, p: u64, q: u64) -> Result<()> {
    if len as u64 != q {
        return Err(Error::IncommensurateSize { len, q });
    }
    if p == 0 || crate::model::gcd(p, q) != 1 {
        return Err(Error::InvalidArgument(format!("p = {p} must be coprime to q = {q}")));
    }
    Ok(())
}

/// `sign = +1`: forward transform, `−1`: inverse. Sites and momenta run 1..L.
fn transform(x: &[Complex64], p: u64, q: u64, sign: i64) -> Vec<Complex64> {
    let roots = roots_of_unity(q);
    let qi = q as i128;
    let scale = 1.0 / (q as f64).sqrt();
    (1..=q as i128)
        .map(|k| {
            let s: Complex64 = x
                .iter()
                .enumerate()
                .map(|(i, xi)| {
                    let n = i as i128 + 1;
                    let r = ((sign as i128 * p as i128 * n * k) % qi + qi) % qi;
                    xi * roots[r as usize]
                })
                .sum();
            s * scale
        })
        .collect()
}

/// `φ_k = L^{-1/2} Σ_n ψ_n e^{2πi(p/q)nk}`, unitary for `L = q`.
pub fn fourier_transform(psi: &[Complex64], p: u64, q: u64) -> Result<DualState> {
    check_size(psi.len(), p, q)?;
    Ok(DualState::new(transform(psi, p, q, 1)))
}

/// Inverse of [`fourier_transform`].
pub fn inverse_fourier_transform(phi: &[Complex64], p: u64, q: u64) -> Result<Vec<Complex64>> {
    check_size(phi.len(), p, q)?;
    Ok(transform(phi, p, q, -1))
}

/// Momentum-space operator of the exponential ring, scaled by `1/V`.
///
/// Row `k` reads `(2/V)cos(2π(p/q)k) χ_k + χ_{k−1}`; the closure term
/// `e^{iLθ} χ_L` sits in row 1. Its eigenvalues times `V` are those of the
/// position-space ring.
pub fn build_dual_exp(spec: &ModelSpec) -> Result<Hamiltonian> {
    spec.validate()?;
    if spec.kind != ModelKind::ExpPotential || spec.boundary != Boundary::Periodic {
        return Err(Error::InvalidSpec("dual model needs a periodic exponential ring".into()));
    }
    check_size(spec.len, spec.p, spec.q)?;
    if spec.v <= 0.0 {
        return Err(Error::InvalidSpec("dual model needs V > 0".into()));
    }
    let freq = Frequency::Rational { p: spec.p, q: spec.q };
    let onsite = (1..=spec.len as i64)
        .map(|k| Complex64::new(2.0 / spec.v * freq.phase(k).cos(), 0.0))
        .collect();
    Ok(Hamiltonian {
        onsite,
        hop_right: Complex64::new(1.0, 0.0),
        hop_left: Complex64::new(0.0, 0.0),
        boundary: Boundary::Periodic,
        twist: Complex64::from_polar(1.0, spec.len as f64 * spec.theta),
    })
}

fn momentum_frequency(spec: &ModelSpec, k: usize) -> Frequency {
    if k as u64 > spec.q {
        Frequency::Irrational(GOLDEN_ALPHA)
    } else {
        Frequency::Rational { p: spec.p, q: spec.q }
    }
}

/// Block means of `terms`, used for a standard error of a long average.
fn block_estimate(terms: impl Iterator<Item = Result<f64>>, count: usize) -> Result<(f64, f64)> {
    let block = count.div_ceil(BLOCKS);
    let mut sums = vec![0.0; BLOCKS];
    let mut sizes = vec![0usize; BLOCKS];
    let mut total = 0.0;
    for (i, t) in terms.enumerate() {
        let t = t?;
        total += t;
        sums[i / block] += t;
        sizes[i / block] += 1;
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&sizes)
        .filter(|(_, &n)| n > 0)
        .map(|(s, &n)| s / n as f64)
        .collect();
    Ok((total / count as f64, mean_stderr(&means).1))
}

/// `γ_m = (1/K) Σ_{k=1..K} ln|(E − 2cos(2παk)) / V|`.
pub fn lyapunov_momentum_product(spec: &ModelSpec, e: Complex64, k_terms: usize) -> Result<LyapunovEstimate> {
    if spec.kind != ModelKind::ExpPotential {
        return Err(Error::InvalidSpec("momentum product needs the exponential model".into()));
    }
    if !(spec.v > 0.0) {
        return Err(Error::InvalidSpec("momentum product needs V > 0".into()));
    }
    if k_terms < MIN_MOMENTUM_TERMS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_MOMENTUM_TERMS} terms, got {k_terms}"
        )));
    }
    let freq = momentum_frequency(spec, k_terms);
    let ln_v = spec.v.ln();
    let terms = (1..=k_terms as u64).map(|k| {
        let d = (e - 2.0 * freq.phase(k as i64).cos()).norm();
        if d < RESONANCE_TOLERANCE {
            Err(Error::Resonance { k })
        } else {
            Ok(d.ln() - ln_v)
        }
    });
    let (gamma, stderr) = block_estimate(terms, k_terms)?;
    Ok(LyapunovEstimate {
        gamma,
        method: Method::MomentumProduct,
        n: k_terms,
        vartheta: 0.0,
        stderr,
    })
}

/// Coefficients of the two-step momentum recursion of the tangent model,
/// `φ_{k+1} = (a_k / b_k) φ_{k−1}` with
/// `a_k = −2cos(2πα(k−1)) + V + E` and `b_k = 2cos(2πα(k+1)) + V − E`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTanRecursion {
    pub v: f64,
    pub e: Complex64,
    pub freq: Frequency,
}

pub fn build_dual_tan(spec: &ModelSpec, e: Complex64) -> Result<DualTanRecursion> {
    if spec.kind != ModelKind::TanPotential {
        return Err(Error::InvalidSpec("dual recursion needs the tangent model".into()));
    }
    spec.validate()?;
    Ok(DualTanRecursion {
        v: spec.v,
        e,
        freq: Frequency::Rational { p: spec.p, q: spec.q },
    })
}

impl DualTanRecursion {
    pub fn with_frequency(mut self, freq: Frequency) -> Self {
        self.freq = freq;
        self
    }

    pub fn a(&self, k: i64) -> Complex64 {
        -2.0 * self.freq.phase(k - 1).cos() + self.v + self.e
    }

    pub fn b(&self, k: i64) -> Complex64 {
        2.0 * self.freq.phase(k + 1).cos() + self.v - self.e
    }

    pub fn ratio(&self, k: i64) -> Result<Complex64> {
        let b = self.b(k);
        if b.norm() < DIVISION_TOLERANCE {
            return Err(Error::DivisionNearZero { k });
        }
        Ok(self.a(k) / b)
    }

    /// `(1/K) Σ_{k=1..K} (ln|a_k| − ln|b_k|)`: growth per recursion step,
    /// which spans two sites. Uses the golden frequency when `K > q`.
    pub fn mean_log_ratio(&self, k_terms: usize) -> Result<f64> {
        let rec = match self.freq {
            Frequency::Rational { q, .. } if k_terms as u64 > q => {
                self.clone().with_frequency(Frequency::Irrational(GOLDEN_ALPHA))
            }
            _ => self.clone(),
        };
        let mut total = 0.0;
        for k in 1..=k_terms as i64 {
            let b = rec.b(k);
            if b.norm() < DIVISION_TOLERANCE {
                return Err(Error::DivisionNearZero { k });
            }
            total += rec.a(k).norm().ln() - b.norm().ln();
        }
        Ok(total / k_terms as f64)
    }

    /// Growth per site, `(1/2K) Σ (ln|a_k| − ln|b_k|)`.
    pub fn lyapunov(&self, k_terms: usize) -> Result<LyapunovEstimate> {
        if k_terms < MIN_MOMENTUM_TERMS {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_MOMENTUM_TERMS} terms, got {k_terms}"
            )));
        }
        Ok(LyapunovEstimate::exact(
            0.5 * self.mean_log_ratio(k_terms)?,
            Method::MomentumProduct,
            k_terms,
        ))
    }
}

/// Midpoint average over one period of
/// `ln|−2cos(2πx) + V + E| − ln|2cos(2πx) + V − E|`.
///
/// If a node lands on a logarithmic singularity the grid is shifted by a
/// fixed irrational fraction of a cell and retried.
pub fn lyapunov_momentum_tan(e: Complex64, v: f64, quadrature_points: usize) -> Result<LyapunovEstimate> {
    if quadrature_points < MIN_MOMENTUM_TERMS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_MOMENTUM_TERMS} quadrature points, got {quadrature_points}"
        )));
    }
    let m = quadrature_points as f64;
    'offsets: for attempt in 0..4 {
        let offset = 0.5 + attempt as f64 * (GOLDEN_ALPHA - 0.5);
        let mut total = 0.0;
        for j in 0..quadrature_points {
            let c = (TAU * (j as f64 + offset) / m).cos();
            let g1 = (-2.0 * c + v + e).norm();
            let g2 = (2.0 * c + v - e).norm();
            if g1 < QUADRATURE_GUARD || g2 < QUADRATURE_GUARD {
                continue 'offsets;
            }
            total += g1.ln() - g2.ln();
        }
        return Ok(LyapunovEstimate::exact(total / m, Method::ClosedForm, quadrature_points));
    }
    Err(Error::SingularQuadrature)
}
