//! Position-space Lyapunov exponents from products of 2×2 transfer matrices.
//!
//! The recursion `ψ_{n+1} = (E − U_n) ψ_n − ψ_{n−1}` is written as
//! `(ψ_{n+1}, ψ_n)ᵀ = T_n (ψ_n, ψ_{n−1})ᵀ` with `T_n = [[E − U_n, −1], [1, 0]]`.
//! The phase can be complexified, `θ → θ − iϑ`, and [`avila_scan`] extracts
//! the piecewise-linear, integer-slope structure of `γ(ϑ)`.
//!
//! Products longer than one period `q` use the irrational golden frequency
//! instead of the rational approximant; over many periods a rational
//! frequency only sees `q` distinct phases.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{distance_to_tan_pole, ModelKind, ModelSpec, GOLDEN_ALPHA, TAN_POLE_EXCLUSION};

pub type Mat2 = [[Complex64; 2]; 2];

pub const DEFAULT_PHASE_SAMPLES: usize = 8;
pub const DEFAULT_PRODUCT_LENGTH: usize = 1_000_000;
pub const MIN_PRODUCT_LENGTH: usize = 1_000;

/// Attempts at nudging a phase sample off a tangent pole before giving up.
const SINGULAR_RETRIES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    TransferProduct,
    MomentumProduct,
    Thouless,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub gamma: f64,
    pub method: Method,
    /// Product length or sample count.
    pub n: usize,
    pub vartheta: f64,
    /// Standard error over phase samples; 0 when only one sample is taken.
    pub stderr: f64,
}

impl LyapunovEstimate {
    pub fn exact(gamma: f64, method: Method, n: usize) -> Self {
        LyapunovEstimate {
            gamma,
            method,
            n,
            vartheta: 0.0,
            stderr: 0.0,
        }
    }
}

/// Spatial frequency used to evaluate the potential phase `2παn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frequency {
    Rational { p: u64, q: u64 },
    Irrational(f64),
}

impl Frequency {
    /// `2παn` reduced to `[0, 2π)`.
    pub fn phase(self, n: i64) -> f64 {
        match self {
            Frequency::Rational { p, q } => {
                let q = q as i128;
                let r = ((p as i128 * n as i128) % q + q) % q;
                TAU * (r as f64) / (q as f64)
            }
            Frequency::Irrational(alpha) => {
                let x = alpha * n as f64;
                TAU * (x - x.floor())
            }
        }
    }

    /// Rational for products within one period, golden otherwise.
    pub fn for_length(spec: &ModelSpec, n: usize) -> Self {
        if n as u64 > spec.q {
            Frequency::Irrational(GOLDEN_ALPHA)
        } else {
            Frequency::Rational {
                p: spec.p,
                q: spec.q,
            }
        }
    }
}

/// Onsite potential at site `n` with phase `θ − iϑ`.
pub fn complex_potential(spec: &ModelSpec, freq: Frequency, n: i64, theta: f64, vartheta: f64) -> Result<Complex64> {
    let phase = freq.phase(n);
    match spec.kind {
        ModelKind::ExpPotential => Ok(Complex64::from_polar(spec.v * vartheta.exp(), theta - phase)),
        ModelKind::TanPotential => {
            let arg = phase + theta;
            if vartheta == 0.0 {
                let distance = distance_to_tan_pole(arg);
                if distance <= TAN_POLE_EXCLUSION {
                    return Err(Error::SingularPhase { site: n, distance });
                }
                return Ok(Complex64::new(0.0, spec.v * arg.tan()));
            }
            Ok(Complex64::i() * spec.v * Complex64::new(arg, -vartheta).tan())
        }
        ModelKind::HatanoNelson => Err(Error::InvalidSpec(
            "transfer matrices are defined for the quasiperiodic models only".into(),
        )),
    }
}

fn step_matrix(e: Complex64, u: Complex64) -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    [[e - u, -one], [one, zero]]
}

/// `T_n(θ − iϑ) = [[E − U_n(θ − iϑ), −1], [1, 0]]` with the spec's `p/q`.
pub fn transfer_matrix(spec: &ModelSpec, e: Complex64, n: i64, vartheta: f64) -> Result<Mat2> {
    check_kind(spec)?;
    let freq = Frequency::Rational { p: spec.p, q: spec.q };
    Ok(step_matrix(e, complex_potential(spec, freq, n, spec.theta, vartheta)?))
}

pub fn det2(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn check_kind(spec: &ModelSpec) -> Result<()> {
    if spec.kind.is_quasiperiodic() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(
            "transfer matrices are defined for the quasiperiodic models only".into(),
        ))
    }
}

/// `(1/N) ln ‖T_N ⋯ T_1‖` for one phase, renormalizing every step.
fn growth_rate(spec: &ModelSpec, freq: Frequency, e: Complex64, n: usize, theta: f64, vartheta: f64) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut p: Mat2 = [[one, zero], [zero, one]];
    let mut log_norm = 0.0;
    for site in 1..=n as i64 {
        let a = e - complex_potential(spec, freq, site, theta, vartheta)?;
        // [[a, −1], [1, 0]] · P
        let next = [[a * p[0][0] - p[1][0], a * p[0][1] - p[1][1]], p[0]];
        let norm = next
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument(format!("transfer product degenerated at site {site}")));
        }
        log_norm += norm.ln();
        p = next.map(|row| row.map(|z| z / norm));
    }
    Ok(log_norm / n as f64)
}

/// Growth rate at one phase sample; tangent poles push the sample to a
/// nearby phase instead of failing outright.
fn sample_rate(spec: &ModelSpec, freq: Frequency, e: Complex64, n: usize, theta: f64, vartheta: f64) -> Result<f64> {
    let mut theta = theta;
    let mut last = None;
    for attempt in 0..SINGULAR_RETRIES {
        match growth_rate(spec, freq, e, n, theta, vartheta) {
            Err(err @ Error::SingularPhase { .. }) if spec.kind == ModelKind::TanPotential => {
                last = Some(err);
                theta += 1e-3 * (attempt + 1) as f64 * GOLDEN_ALPHA;
            }
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

#[derive(Debug, Clone)]
pub struct PositionOptions {
    pub n: usize,
    pub phase_samples: usize,
}

impl Default for PositionOptions {
    fn default() -> Self {
        PositionOptions {
            n: DEFAULT_PRODUCT_LENGTH,
            phase_samples: DEFAULT_PHASE_SAMPLES,
        }
    }
}

/// Lyapunov exponent averaged over `n_θ` phases `θ + 2πj/n_θ`.
pub fn lyapunov_position(spec: &ModelSpec, e: Complex64, n: usize, vartheta: f64) -> Result<LyapunovEstimate> {
    lyapunov_position_with(
        spec,
        e,
        vartheta,
        &PositionOptions {
            n,
            ..PositionOptions::default()
        },
    )
}

pub fn lyapunov_position_with(
    spec: &ModelSpec,
    e: Complex64,
    vartheta: f64,
    opts: &PositionOptions,
) -> Result<LyapunovEstimate> {
    check_kind(spec)?;
    if opts.n < MIN_PRODUCT_LENGTH {
        return Err(Error::InvalidArgument(format!(
            "product length must be at least {MIN_PRODUCT_LENGTH}, got {}",
            opts.n
        )));
    }
    if opts.phase_samples == 0 || !vartheta.is_finite() || vartheta < 0.0 {
        return Err(Error::InvalidArgument("need phase_samples >= 1 and finite vartheta >= 0".into()));
    }
    let freq = Frequency::for_length(spec, opts.n);
    let k = opts.phase_samples;
    let rates = (0..k)
        .into_par_iter()
        .map(|j| sample_rate(spec, freq, e, opts.n, spec.theta + TAU * j as f64 / k as f64, vartheta))
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&rates);
    Ok(LyapunovEstimate {
        gamma: mean,
        method: Method::TransferProduct,
        n: opts.n,
        vartheta,
        stderr,
    })
}

pub(crate) fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let k = x.len() as f64;
    let mean = x.iter().sum::<f64>() / k;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// One straight piece of `γ(ϑ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// Least-squares slope before rounding.
    pub raw_slope: f64,
    pub slope: i64,
    pub intercept: f64,
}

impl Segment {
    fn eval(&self, x: f64) -> f64 {
        self.raw_slope * x + self.intercept
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvilaScan {
    pub points: Vec<(f64, LyapunovEstimate)>,
    pub segments: Vec<Segment>,
    /// Intersections of consecutive segment lines.
    pub breakpoints: Vec<f64>,
    /// `max |γ_i − max_j line_j(ϑ_i)|`.
    pub residual: f64,
    /// Largest drop of `γ` between consecutive grid points.
    pub monotonicity_violation: f64,
    /// Largest excess of `γ` over the chord through its neighbours.
    pub convexity_violation: f64,
}

pub const SHAPE_TOLERANCE: f64 = 0.02;
pub const FIT_TOLERANCE: f64 = 0.05;
const WINDOW: usize = 4;
const MERGE_SLOPE_DIFF: f64 = 0.1;

impl AvilaScan {
    pub fn slopes(&self) -> Vec<i64> {
        self.segments.iter().map(|s| s.slope).collect()
    }

    /// Largest distance of a fitted slope from its rounded integer.
    pub fn slope_deviation(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| (s.raw_slope - s.slope as f64).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violation <= SHAPE_TOLERANCE
    }

    pub fn is_convex(&self) -> bool {
        self.convexity_violation <= SHAPE_TOLERANCE
    }

    /// CSV with header `x,gamma,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# scan=vartheta\nx,gamma,stderr\n");
        for (x, est) in &self.points {
            out.push_str(&format!("{},{},{}\n", x, est.gamma, est.stderr));
        }
        out
    }
}

/// Samples `γ(E, ϑ)` on `grid` and fits a convex piecewise-linear function.
pub fn avila_scan(spec: &ModelSpec, e: Complex64, grid: &[f64], n: usize) -> Result<AvilaScan> {
    if grid.len() < WINDOW {
        return Err(Error::InvalidArgument(format!("need at least {WINDOW} grid points")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
        return Err(Error::InvalidArgument("grid must be ascending and non-negative".into()));
    }
    let points = grid
        .iter()
        .map(|&x| Ok((x, lyapunov_position(spec, e, n, x)?)))
        .collect::<Result<Vec<_>>>()?;
    let gamma: Vec<f64> = points.iter().map(|p| p.1.gamma).collect();
    let fit = fit_piecewise_linear(grid, &gamma)?;
    let monotonicity_violation = gamma
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(0.0, f64::max);
    let convexity_violation = (1..grid.len() - 1)
        .map(|i| {
            let t = (grid[i] - grid[i - 1]) / (grid[i + 1] - grid[i - 1]);
            gamma[i] - ((1.0 - t) * gamma[i - 1] + t * gamma[i + 1])
        })
        .fold(0.0, f64::max);
    Ok(AvilaScan {
        points,
        segments: fit.segments,
        breakpoints: fit.breakpoints,
        residual: fit.residual,
        monotonicity_violation,
        convexity_violation,
    })
}

pub struct PiecewiseFit {
    pub segments: Vec<Segment>,
    pub breakpoints: Vec<f64>,
    pub residual: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Sliding-window slopes, merged where neighbouring windows agree, refit per
/// segment. Single windows with a non-integer slope straddle a kink and are
/// discarded when longer segments exist.
pub fn fit_piecewise_linear(x: &[f64], y: &[f64]) -> Result<PiecewiseFit> {
    let windows = x.len() + 1 - WINDOW;
    let slopes: Vec<f64> = (0..windows)
        .map(|i| least_squares(&x[i..i + WINDOW], &y[i..i + WINDOW]).0)
        .collect();
    let mut groups: Vec<(usize, usize)> = vec![(0, 0)];
    for i in 1..windows {
        let last = groups.last_mut().expect("non-empty");
        if (slopes[i] - slopes[i - 1]).abs() < MERGE_SLOPE_DIFF {
            last.1 = i;
        } else {
            groups.push((i, i));
        }
    }
    // On coarse grids a straight stretch may span a single window; keep it
    // when its slope is already close to an integer.
    let keep = |g: &(usize, usize)| g.1 > g.0 || (slopes[g.0] - slopes[g.0].round()).abs() < MERGE_SLOPE_DIFF;
    if groups.iter().any(keep) {
        groups.retain(keep);
    }
    let segments: Vec<Segment> = groups
        .iter()
        .map(|&(first, last)| {
            let range = first..last + WINDOW;
            let (raw_slope, intercept) = least_squares(&x[range.clone()], &y[range.clone()]);
            Segment {
                start: x[first],
                end: x[last + WINDOW - 1],
                raw_slope,
                slope: raw_slope.round() as i64,
                intercept,
            }
        })
        .collect();
    // Neighbouring groups can still agree after refitting, before or after
    // the points are reassigned.
    let mut merged = merge_equal_slopes(x, y, segments);
    loop {
        let before = merged.len();
        merged = merge_equal_slopes(x, y, refine_by_activity(x, y, merged));
        let stable = merged.len() == before;
        if stable {
            break;
        }
    }
    let breakpoints = merged
        .windows(2)
        .map(|w| {
            let ds = w[1].raw_slope - w[0].raw_slope;
            if ds.abs() < f64::EPSILON {
                0.5 * (w[0].end + w[1].start)
            } else {
                (w[0].intercept - w[1].intercept) / ds
            }
        })
        .collect();
    let residual = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let model = merged.iter().map(|s| s.eval(xi)).fold(f64::NEG_INFINITY, f64::max);
            (yi - model).abs()
        })
        .fold(0.0, f64::max);
    if residual > FIT_TOLERANCE {
        return Err(Error::FitFailure { residual });
    }
    Ok(PiecewiseFit {
        segments: merged,
        breakpoints,
        residual,
    })
}

/// Joins neighbouring segments whose rounded slopes agree and refits them
/// over their combined span.
fn merge_equal_slopes(x: &[f64], y: &[f64], segments: Vec<Segment>) -> Vec<Segment> {
    let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
    for seg in segments {
        match merged.last_mut() {
            Some(prev) if prev.slope == seg.slope && (prev.raw_slope - seg.raw_slope).abs() < MERGE_SLOPE_DIFF => {
                let lo = x.iter().position(|&v| v == prev.start).expect("grid point");
                let hi = x.iter().position(|&v| v == seg.end).expect("grid point");
                let (raw_slope, intercept) = least_squares(&x[lo..=hi], &y[lo..=hi]);
                *prev = Segment {
                    start: prev.start,
                    end: seg.end,
                    raw_slope,
                    slope: raw_slope.round() as i64,
                    intercept,
                };
            }
            _ => merged.push(seg),
        }
    }
    merged
}

/// Reassigns every point to the line that is largest there and refits,
/// until the assignment is stable. Exact for convex piecewise-linear data.
fn refine_by_activity(x: &[f64], y: &[f64], mut segs: Vec<Segment>) -> Vec<Segment> {
    let mut owner: Vec<usize> = Vec::new();
    for _ in 0..16 {
        let next: Vec<usize> = x
            .iter()
            .map(|&xi| {
                (0..segs.len())
                    .max_by(|&a, &b| segs[a].eval(xi).total_cmp(&segs[b].eval(xi)))
                    .expect("at least one segment")
            })
            .collect();
        if next == owner {
            break;
        }
        owner = next;
        let mut refit = Vec::with_capacity(segs.len());
        for j in 0..segs.len() {
            let idx: Vec<usize> = (0..x.len()).filter(|&i| owner[i] == j).collect();
            if idx.len() < 2 {
                continue;
            }
            let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
            let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            let (raw_slope, intercept) = least_squares(&xs, &ys);
            refit.push(Segment {
                start: xs[0],
                end: xs[xs.len() - 1],
                raw_slope,
                slope: raw_slope.round() as i64,
                intercept,
            });
        }
        if refit.is_empty() {
            break;
        }
        if refit.len() != segs.len() {
            owner.clear();
        }
        segs = refit;
    }
    segs
}
