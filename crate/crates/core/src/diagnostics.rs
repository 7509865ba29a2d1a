//! Eigenstate and spectrum diagnostics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{eigenpairs, eigenvalues};
use crate::error::{Error, Result};
use crate::linalg::{condition_number_1, norm2, CMatrix};
use crate::model::{build, Boundary, Hamiltonian, ModelKind, ModelSpec};

/// Default `|Im E|` tolerance for the quasiperiodic models.
pub const REAL_TOLERANCE: f64 = 1e-6;
/// Hatano–Nelson real-fraction tolerance, relative to `‖H‖_F`.
pub const HN_RELATIVE_TOLERANCE: f64 = 1e-8;
pub const MAX_BASIS_CONDITION: f64 = 1e12;
/// Sites below this fraction of the peak are ignored by the decay fit.
const SUPPORT_CUTOFF: f64 = 1e-12;
const MIN_SUPPORT: usize = 10;

pub fn ipr(state: &[Complex64]) -> Result<f64> {
    let n2: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    if n2 == 0.0 || !n2.is_finite() {
        return Err(Error::ZeroState);
    }
    Ok(state.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() / (n2 * n2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Magnitude of the fitted slope of `ln|ψ|` against ring distance.
    pub rate: f64,
    /// `NaN` when `ln|ψ|` is constant over the support.
    pub r_squared: f64,
    pub peak: usize,
    pub usable: usize,
}

/// Least-squares fit of `ln|ψ_n|` against `min(|n − n₀|, L − |n − n₀|)`,
/// `n₀` the peak site.
pub fn decay_rate_fit(state: &[Complex64]) -> Result<DecayFit> {
    let len = state.len();
    if len < 20 {
        return Err(Error::InvalidArgument(format!("decay fit needs L >= 20, got {len}")));
    }
    let mags: Vec<f64> = state.iter().map(|z| z.norm()).collect();
    let (peak, &max) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if max == 0.0 {
        return Err(Error::ZeroState);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = mags
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > SUPPORT_CUTOFF * max)
        .map(|(n, &m)| {
            let d = n.abs_diff(peak);
            (d.min(len - d) as f64, m.ln())
        })
        .unzip();
    fit_log_profile(&xs, &ys, peak)
}

/// One-sided variant of [`decay_rate_fit`] for states produced by a
/// one-sided recursion: fits `ln|ψ_{n₀+d}|` against `d = 0, 1, …` (indices
/// modulo `L`) up to the first site below the cutoff, so a second peak
/// elsewhere on the ring is never mixed in.
pub fn decay_rate_fit_forward(state: &[Complex64]) -> Result<DecayFit> {
    let len = state.len();
    if len < 20 {
        return Err(Error::InvalidArgument(format!("decay fit needs L >= 20, got {len}")));
    }
    let mags: Vec<f64> = state.iter().map(|z| z.norm()).collect();
    let (peak, &max) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if max == 0.0 {
        return Err(Error::ZeroState);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..len)
        .map(|d| (d, mags[(peak + d) % len]))
        .take_while(|&(_, m)| m > SUPPORT_CUTOFF * max)
        .map(|(d, m)| (d as f64, m.ln()))
        .unzip();
    fit_log_profile(&xs, &ys, peak)
}

fn fit_log_profile(xs: &[f64], ys: &[f64], peak: usize) -> Result<DecayFit> {
    if xs.len() < MIN_SUPPORT {
        return Err(Error::InsufficientSupport { usable: xs.len() });
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (my + slope * (x - mx))).powi(2))
        .sum();
    // Relative to the scale of ln|ψ|, a spread this small is rounding noise.
    let r_squared = if syy <= 1e-20 * (1.0 + my * my) * k {
        f64::NAN
    } else {
        1.0 - ss_res / syy
    };
    Ok(DecayFit {
        rate: slope.abs(),
        r_squared,
        peak,
        usable: xs.len(),
    })
}

/// `max_{a ∈ A} min_{b ∈ B} |a − b|`.
pub fn directed_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(a
        .par_iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max))
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn spectral_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    Ok(directed_distance(a, b)?.max(directed_distance(b, a)?))
}

/// Fraction of values with `|Im E| ≤ tol`; `NaN` for an empty set.
pub fn real_fraction(values: &[Complex64], tol: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().filter(|z| z.im.abs() <= tol).count() as f64 / values.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evolution {
    pub times: Vec<f64>,
    /// `ln ‖ψ(t)‖`, finite even where the norm itself overflows.
    pub log_norms: Vec<f64>,
    pub growth_exponent: f64,
    pub max_imag: f64,
    pub basis_condition: f64,
}

impl Evolution {
    pub fn norms(&self) -> Vec<f64> {
        self.log_norms.iter().map(|l| l.exp()).collect()
    }
}

/// `t_k = k T / n` for `k = 1..=n`.
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

/// Evolves `ψ₀` under `e^{−iHt}` by eigenbasis expansion and fits the growth
/// rate of `ln‖ψ(t)‖` over the second half of `t_grid`.
pub fn evolve_norm(h: &Hamiltonian, psi0: &[Complex64], t_grid: &[f64]) -> Result<Evolution> {
    if psi0.len() != h.len() {
        return Err(Error::InvalidArgument("initial state length differs from L".into()));
    }
    if norm2(psi0) == 0.0 {
        return Err(Error::ZeroState);
    }
    if t_grid.len() < 4 || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("time grid must be positive, ascending, >= 4 points".into()));
    }
    let spectrum = eigenpairs(&h.densify())?;
    spectrum.check_residuals()?;
    let vectors = spectrum.vectors.as_ref().expect("eigenpairs returns vectors");
    let n = h.len();
    let basis = CMatrix::from_fn(n, |i, j| vectors[j][i]);
    let basis_condition = condition_number_1(&basis);
    if !(basis_condition <= MAX_BASIS_CONDITION) {
        return Err(Error::IllConditionedBasis { cond: basis_condition });
    }
    let coeffs = basis.lu().solve(psi0)?;
    let max_imag = spectrum.max_imag();
    let log_norms = t_grid
        .iter()
        .map(|&t| {
            // e^{−iEt} e^{−μt} with μ = max Im E keeps every factor ≤ 1.
            let phases: Vec<Complex64> = spectrum
                .values
                .iter()
                .zip(&coeffs)
                .map(|(e, c)| c * (Complex64::new(0.0, -1.0) * e * t - max_imag * t).exp())
                .collect();
            let psi = basis.matvec(&phases);
            norm2(&psi).ln() + max_imag * t
        })
        .collect::<Vec<f64>>();
    let half = t_grid.len() / 2;
    let growth_exponent = slope(&t_grid[half..], &log_norms[half..]);
    Ok(Evolution {
        times: t_grid.to_vec(),
        log_norms,
        growth_exponent,
        max_imag,
        basis_condition,
    })
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub h_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    /// `real_fraction[i][s]` for `h_grid[i]` and `seeds[s]`; `NaN` on failure.
    pub real_fraction: Vec<Vec<f64>>,
    /// Largest grid `h` where every seed is fully real.
    pub h1_est: Option<f64>,
    /// Smallest grid `h` where no seed has a real eigenvalue.
    pub h2_est: Option<f64>,
    pub n_seeds: usize,
    /// Per-instance solver failures as `(h index, seed, message)`.
    pub errors: Vec<(usize, u64, String)>,
}

impl RegimeReport {
    /// Largest increase of any seed's fraction between consecutive `h`.
    pub fn monotonicity_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..self.n_seeds {
            for w in self.real_fraction.windows(2) {
                let rise = w[1][s] - w[0][s];
                if rise.is_finite() {
                    worst = worst.max(rise);
                }
            }
        }
        worst
    }

    /// CSV `h,seed,real_fraction` in grid order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,seed,real_fraction\n");
        for (i, h) in self.h_grid.iter().enumerate() {
            for (s, seed) in self.seeds.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", h, seed, self.real_fraction[i][s]));
            }
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "h1_est": self.h1_est,
            "h2_est": self.h2_est,
            "n_seeds": self.n_seeds,
            "failed_instances": self.errors.len(),
        })
    }
}

/// Real fraction with the relative Hatano–Nelson tolerance `1e-8 ‖H‖_F`.
pub fn hatano_real_fraction(spec: &ModelSpec) -> Result<f64> {
    let m = build(spec)?.densify();
    let tol = HN_RELATIVE_TOLERANCE * m.frobenius_norm();
    Ok(real_fraction(&eigenvalues(&m)?.values, tol))
}

/// Periodic Hatano–Nelson rings over `h_grid × {seed, seed+1, …}`.
pub fn hatano_regime_scan(base: &ModelSpec, h_grid: &[f64], n_seeds: usize) -> Result<RegimeReport> {
    if base.kind != ModelKind::HatanoNelson {
        return Err(Error::InvalidSpec("regime scan needs a Hatano-Nelson spec".into()));
    }
    if h_grid.first() != Some(&0.0) || h_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("h grid must start at 0 and ascend".into()));
    }
    if n_seeds < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 seeds, got {n_seeds}")));
    }
    let seeds: Vec<u64> = (0..n_seeds as u64).map(|s| base.seed.wrapping_add(s)).collect();
    let jobs: Vec<(usize, usize)> = (0..h_grid.len()).flat_map(|i| (0..n_seeds).map(move |s| (i, s))).collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(i, s)| {
            let spec = base
                .clone()
                .with_boundary(Boundary::Periodic)
                .with_h(h_grid[i])
                .with_seed(seeds[s]);
            hatano_real_fraction(&spec)
        })
        .collect();
    let mut real_fraction = vec![vec![f64::NAN; n_seeds]; h_grid.len()];
    let mut errors = Vec::new();
    for (&(i, s), r) in jobs.iter().zip(results) {
        match r {
            Ok(f) => real_fraction[i][s] = f,
            Err(e) => errors.push((i, seeds[s], e.to_string())),
        }
    }
    let h1_est = h_grid
        .iter()
        .zip(&real_fraction)
        .rfind(|(_, row)| row.iter().all(|&f| f == 1.0))
        .map(|(&h, _)| h);
    let h2_est = h_grid
        .iter()
        .zip(&real_fraction)
        .find(|(_, row)| row.iter().all(|&f| f == 0.0))
        .map(|(&h, _)| h);
    Ok(RegimeReport {
        h_grid: h_grid.to_vec(),
        seeds,
        real_fraction,
        h1_est,
        h2_est,
        n_seeds,
        errors,
    })
}
