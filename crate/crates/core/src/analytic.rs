//! Closed-form spectra and Lyapunov exponents.
//!
//! For the exponential ring the spectrum is the real band `2cos k̃` when
//! `V ≤ 1` and the loop `V e^{ik̃} + e^{−ik̃}/V` when `V > 1`. On a finite
//! commensurate ring of `q` sites the eigenvalues are known exactly:
//! `Π_k (E − 2cos(2πk/q)) = V^q e^{iqθ}`, and with `E = w + 1/w` the left side
//! is `w^q + w^{−q} − 2`, so `w^q` solves a quadratic ([`ring_spectrum_exp`]).

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_csv, read_csv_metadata};
use crate::transfer::{LyapunovEstimate, Method};

/// Spectrum entries closer than this to a Thouless probe are degenerate.
pub const DEGENERATE_DISTANCE: f64 = 1e-12;
/// Half-height of the imaginary axis sampled by [`analytic_spectrum_tan`].
pub const TAN_IMAG_EXTENT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    RealBand,
    Loop,
    TanConjecture,
    /// Exact eigenvalues of a finite commensurate exponential ring.
    Ring,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::RealBand => "RealBand",
            CurveKind::Loop => "Loop",
            CurveKind::TanConjecture => "TanConjecture",
            CurveKind::Ring => "Ring",
        }
    }
}

impl std::str::FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "RealBand" => Ok(CurveKind::RealBand),
            "Loop" => Ok(CurveKind::Loop),
            "TanConjecture" => Ok(CurveKind::TanConjecture),
            "Ring" => Ok(CurveKind::Ring),
            _ => Err(Error::Parse(format!("unknown curve kind {s:?}"))),
        }
    }
}

/// Samples `(k̃, E)` of a closed-form spectral set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCurve {
    pub kind: CurveKind,
    pub v: f64,
    pub samples: Vec<(f64, Complex64)>,
    /// Set for sets the theory only conjectures.
    pub conjecture: bool,
}

impl AnalyticCurve {
    pub fn points(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    /// CSV `k,re,im` preceded by one `#` metadata line.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# kind={} V={} conjecture={}\nk,re,im\n",
            self.kind.as_str(),
            self.v,
            self.conjecture
        );
        for (k, e) in &self.samples {
            out.push_str(&format!("{},{},{}\n", k, e.re, e.im));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let meta = read_csv_metadata(text);
        let get = |key: &str| {
            meta.get(key)
                .ok_or_else(|| Error::SchemaMismatch(format!("curve metadata lacks {key}")))
        };
        let kind: CurveKind = get("kind")?.parse()?;
        let v: f64 = get("V")?.parse().map_err(|e| Error::Parse(format!("V: {e}")))?;
        let conjecture: bool = get("conjecture")?
            .parse()
            .map_err(|e| Error::Parse(format!("conjecture: {e}")))?;
        let samples = read_csv(text, &["k", "re", "im"])?
            .into_iter()
            .map(|r| (r[0], Complex64::new(r[1], r[2])))
            .collect();
        Ok(AnalyticCurve {
            kind,
            v,
            samples,
            conjecture,
        })
    }
}

impl AnalyticCurve {
    /// Distance from `e` to the curve, linearly interpolated between
    /// consecutive samples. Samples with decreasing `k` start a new branch;
    /// closed curves also join their last sample to the first. A `Ring` is a
    /// discrete set and is measured point to point; the tangent set is
    /// measured exactly, including the unsampled part of the axis.
    pub fn distance_to(&self, e: Complex64) -> f64 {
        let pts = &self.samples;
        let point = |a: Complex64| (e - a).norm();
        let segment = |a: Complex64, b: Complex64| {
            let d = b - a;
            let len2 = d.norm_sqr();
            if len2 == 0.0 {
                return point(a);
            }
            let t = (((e - a) * d.conj()).re / len2).clamp(0.0, 1.0);
            point(a + d * t)
        };
        if self.kind == CurveKind::TanConjecture {
            return distance_to_tan_set(e, self.v);
        }
        let mut best = pts.iter().map(|s| point(s.1)).fold(f64::INFINITY, f64::min);
        if self.kind == CurveKind::Ring {
            return best;
        }
        for w in pts.windows(2) {
            if w[1].0 >= w[0].0 {
                best = best.min(segment(w[0].1, w[1].1));
            }
        }
        if matches!(self.kind, CurveKind::RealBand | CurveKind::Loop) && pts.len() > 2 {
            best = best.min(segment(pts[pts.len() - 1].1, pts[0].1));
        }
        best
    }
}

fn uniform_k(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| TAU * j as f64 / n as f64)
}

/// Real band for `V ≤ 1`, loop for `V > 1`, on a uniform `k̃` grid.
pub fn analytic_spectrum_exp(v: f64, n_samples: usize) -> Result<AnalyticCurve> {
    if !(v > 0.0 && v.is_finite()) || n_samples < 2 {
        return Err(Error::InvalidArgument("need V > 0 and at least 2 samples".into()));
    }
    let (kind, samples) = if v <= 1.0 {
        (
            CurveKind::RealBand,
            uniform_k(n_samples).map(|k| (k, Complex64::new(2.0 * k.cos(), 0.0))).collect(),
        )
    } else {
        (CurveKind::Loop, uniform_k(n_samples).map(|k| (k, loop_point(v, k))).collect())
    };
    Ok(AnalyticCurve {
        kind,
        v,
        samples,
        conjecture: false,
    })
}

/// `V e^{ik̃} + e^{−ik̃}/V`.
pub fn loop_point(v: f64, k: f64) -> Complex64 {
    Complex64::from_polar(v, k) + Complex64::from_polar(1.0 / v, -k)
}

/// Exact eigenvalues of the periodic exponential ring with `q` sites.
///
/// `ln w^q` is evaluated as `2 asinh(√c / 2)` with `c = V^q e^{iqθ}`, or
/// asymptotically as `ln c + 2/c` once `c` would overflow.
pub fn ring_spectrum_exp(v: f64, q: u64, theta: f64) -> Result<AnalyticCurve> {
    if !(v >= 0.0 && v.is_finite()) || q < 1 {
        return Err(Error::InvalidArgument("need V >= 0 and q >= 1".into()));
    }
    let qf = q as f64;
    let ln_u = if v == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let ln_c = Complex64::new(qf * v.ln(), qf * theta);
        if ln_c.re > 60.0 {
            ln_c + 2.0 * (-ln_c).exp()
        } else {
            2.0 * ((ln_c * 0.5).exp() * 0.5).asinh()
        }
    };
    let samples = (0..q)
        .map(|j| {
            let ln_w = (ln_u + Complex64::new(0.0, TAU * j as f64)) / qf;
            let w = ln_w.exp();
            (ln_w.im, w + 1.0 / w)
        })
        .collect();
    Ok(AnalyticCurve {
        kind: CurveKind::Ring,
        v,
        samples,
        conjecture: false,
    })
}

/// `(1/2π) ∫₀^{2π} ln|E − 2cos k| dk = ln|w|`, `w` the larger root of
/// `w² − Ew + 1 = 0`. Exactly 0 on the band `[−2, 2]`.
pub fn dini_integral(e: Complex64) -> f64 {
    if e.im == 0.0 && e.re.abs() <= 2.0 {
        return 0.0;
    }
    let s = (e * e - 4.0).sqrt();
    let w1 = (e + s) * 0.5;
    let w2 = (e - s) * 0.5;
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    let r = w.norm();
    if r <= 1.0 {
        0.0
    } else {
        r.ln()
    }
}

/// Composite midpoint rule for the Dini integral; a test oracle.
pub fn dini_quadrature(e: Complex64, points: usize) -> Result<f64> {
    let m = points as f64;
    let mut total = 0.0;
    for j in 0..points {
        let d = (e - 2.0 * (TAU * (j as f64 + 0.5) / m).cos()).norm();
        if d == 0.0 {
            return Err(Error::SingularQuadrature);
        }
        total += d.ln();
    }
    Ok(total / m)
}

pub fn gamma_position_closed(v: f64) -> f64 {
    v.ln().max(0.0)
}

pub fn gamma_momentum_closed(v: f64) -> f64 {
    (-v.ln()).max(0.0)
}

/// `γ − γ_m − ln V`.
pub fn duality_relation_residual(gamma_pos: f64, gamma_mom: f64, v: f64) -> f64 {
    gamma_pos - gamma_mom - v.ln()
}

/// `(1/L) Σ_{E'} ln|E − E'|`; fails if a spectrum entry coincides with `E`.
pub fn thouless_gamma(spectrum: &[Complex64], e: Complex64) -> Result<f64> {
    thouless_impl(spectrum, e, false)
}

/// As [`thouless_gamma`], skipping (instead of rejecting) coincident entries.
pub fn thouless_gamma_excluding(spectrum: &[Complex64], e: Complex64) -> Result<f64> {
    thouless_impl(spectrum, e, true)
}

fn thouless_impl(spectrum: &[Complex64], e: Complex64, exclude: bool) -> Result<f64> {
    if spectrum.len() < 2 {
        return Err(Error::InvalidArgument("Thouless formula needs at least 2 eigenvalues".into()));
    }
    let mut total = 0.0;
    for (index, ev) in spectrum.iter().enumerate() {
        let d = (e - ev).norm();
        if d < DEGENERATE_DISTANCE {
            if exclude {
                continue;
            }
            return Err(Error::DegenerateDistance { index });
        }
        total += d.ln();
    }
    Ok(total / spectrum.len() as f64)
}

pub fn thouless_estimate(spectrum: &[Complex64], e: Complex64) -> Result<LyapunovEstimate> {
    Ok(LyapunovEstimate::exact(
        thouless_gamma(spectrum, e)?,
        Method::Thouless,
        spectrum.len(),
    ))
}

fn arcosh_clamped(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        x.acosh()
    }
}

/// Larger of `arcosh((|E±V+2| + |E±V−2|)/4)`, each clamped to 0 below 1.
pub fn gamma_tan_closed(e: Complex64, v: f64) -> f64 {
    let branch = |z: Complex64| arcosh_clamped(((z + 2.0).norm() + (z - 2.0).norm()) / 4.0);
    branch(e + v).max(branch(e - v))
}

/// Conjectured tangent-model spectrum: the segment `[V−2, 2−V]` (when
/// `V ≤ 2`) and the imaginary axis, sampled on `[−4i, 4i]`.
pub fn analytic_spectrum_tan(v: f64, n_samples: usize) -> Result<AnalyticCurve> {
    if !(v > 0.0 && v.is_finite()) || n_samples < 2 {
        return Err(Error::InvalidArgument("need V > 0 and at least 2 samples".into()));
    }
    let grid = |lo: f64, hi: f64| {
        (0..n_samples).map(move |j| {
            let t = j as f64 / (n_samples - 1) as f64;
            (t, lo + t * (hi - lo))
        })
    };
    let mut samples: Vec<(f64, Complex64)> = Vec::with_capacity(2 * n_samples);
    if v <= 2.0 {
        samples.extend(grid(v - 2.0, 2.0 - v).map(|(t, x)| (t, Complex64::new(x, 0.0))));
    }
    samples.extend(grid(-TAN_IMAG_EXTENT, TAN_IMAG_EXTENT).map(|(t, y)| (t, Complex64::new(0.0, y))));
    Ok(AnalyticCurve {
        kind: CurveKind::TanConjecture,
        v,
        samples,
        conjecture: true,
    })
}

/// Distance from `E` to `[V−2, 2−V] ∪ iℝ`.
pub fn distance_to_tan_set(e: Complex64, v: f64) -> f64 {
    let axis = e.re.abs();
    if v > 2.0 {
        return axis;
    }
    let x = e.re.clamp(v - 2.0, 2.0 - v);
    axis.min((e - Complex64::new(x, 0.0)).norm())
}
