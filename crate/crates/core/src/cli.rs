//! Experiment runner behind the `nhlab` binary.
//!
//! Each analysis is one subcommand. Parameters are read from an optional flat
//! `key=value` config file (`--config`), then overlaid by command-line flags
//! and `--set key=value` pairs; the command line wins. Results are written to
//! the output directory (`--out`, else `out=` in the config, else the
//! `NHLAB_OUT` environment variable, else `./nhlab-out`) as CSV or JSON, each
//! file atomically, and `manifest.json` is written last with a SHA-256 per
//! emitted file.
//!
//! Exit status is 0 on success, 2 when the command line or config cannot be
//! parsed, and 3 when the computation fails; in the last case the manifest
//! carries the error record.
//!
//! Config keys shared by all subcommands: `kind`, `V`, `m` (Fibonacci index,
//! `L = F_m`), `p`, `q`, `theta`, `h`, `L`, `boundary`, `seed`, `out`,
//! `format`. Complex energies are written `0.5`, `2i`, `-1+0.25i`; lists are
//! comma separated; grids are either lists or `start:stop:count`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{
    analytic_spectrum_exp, analytic_spectrum_tan, dini_integral, dini_quadrature, distance_to_tan_set,
    gamma_position_closed, gamma_tan_closed, loop_point, thouless_estimate, AnalyticCurve, CurveKind,
};
use crate::diagnostics::{
    evolve_norm, hatano_regime_scan, real_fraction, spectral_distance, time_grid,
    REAL_TOLERANCE,
};
use crate::duality::{build_dual_exp, build_dual_tan, lyapunov_momentum_product};
use crate::eigensolver::{eigenpairs, eigenvalues, Spectrum};
use crate::error::{Error, Result};
use crate::io::{atomic_write, sha256_hex};
use crate::model::{self, fibonacci_approximant, parse_kv, Boundary, ModelKind, ModelSpec, DEFAULT_THETA};
use crate::transfer::{avila_scan, lyapunov_position_with, LyapunovEstimate, Method, PositionOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const MANIFEST_NAME: &str = "manifest.json";
pub const OUT_ENV: &str = "NHLAB_OUT";
const DEFAULT_OUT: &str = "nhlab-out";
const DEFAULT_FIB_INDEX: usize = 16;
const DEFAULT_HN_LEN: usize = 233;

#[derive(Parser, Debug)]
#[command(name = "nhlab", about = "Real and complex spectra of non-Hermitian lattice models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalues of a model, with the matching closed-form curve.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Also compute eigenvectors and report residuals.
        #[arg(long)]
        residuals: bool,
        /// Samples of the closed-form curve.
        #[arg(long)]
        samples: Option<String>,
    },
    /// Lyapunov exponents at a list of energies.
    Lyapunov {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'E', long = "energies", allow_hyphen_values = true)]
        energies: Option<String>,
        /// transfer | momentum | thouless | closed
        #[arg(long)]
        method: Option<String>,
        /// Transfer product length.
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        vartheta: Option<String>,
        /// Momentum-space product length.
        #[arg(long = "k-terms")]
        k_terms: Option<String>,
    },
    /// Lyapunov exponent against the complexified phase, with integer slopes.
    AvilaScan {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'E', long = "energy", allow_hyphen_values = true)]
        energy: Option<String>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        n: Option<String>,
    },
    /// Position spectrum against the scaled dual spectrum, and the
    /// position/momentum exponent relation.
    DualityCheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'E', long = "energies", allow_hyphen_values = true)]
        energies: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long = "k-terms")]
        k_terms: Option<String>,
    },
    /// Closed-form Dini integral, optionally against quadrature.
    Dini {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'E', long = "energies", allow_hyphen_values = true)]
        energies: Option<String>,
        /// Quadrature points; 0 skips the quadrature column.
        #[arg(long)]
        points: Option<String>,
    },
    /// Thouless-formula exponent over a numerical spectrum.
    Thouless {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'E', long = "energies", allow_hyphen_values = true)]
        energies: Option<String>,
        /// Spectrum file to use instead of diagonalizing the model.
        #[arg(long)]
        spectrum: Option<String>,
    },
    /// Norm growth of a site-localized state under `e^{-iHt}`.
    Dynamics {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "t-max")]
        t_max: Option<String>,
        #[arg(long)]
        steps: Option<String>,
        #[arg(long)]
        site: Option<String>,
    },
    /// Checks the tangent-model spectrum and exponent against the conjecture.
    TanCheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'E', long = "energies", allow_hyphen_values = true)]
        energies: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Real fractions of Hatano-Nelson rings over gauge fields and seeds.
    HatanoScan {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "h-grid")]
        h_grid: Option<String>,
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Compares result files: distances, real fractions, duality residuals.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        inputs: Vec<String>,
        #[arg(long)]
        tol: Option<String>,
    },
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Flat key=value config file.
    #[arg(short = 'c', long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(short = 'V', allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Fibonacci index: L = F_m, alpha = F_{m-1}/F_m.
    #[arg(short = 'm')]
    pub m: Option<String>,
    #[arg(short = 'p')]
    pub p: Option<String>,
    #[arg(short = 'q')]
    pub q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long = "h", allow_hyphen_values = true)]
    pub h: Option<String>,
    #[arg(short = 'L')]
    pub len: Option<String>,
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(short = 'o', long)]
    pub out: Option<String>,
    /// csv | json
    #[arg(long)]
    pub format: Option<String>,
    /// Any config key, e.g. --set tol=1e-4.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl CommonArgs {
    fn overrides(&self, map: &mut BTreeMap<String, String>) -> Result<()> {
        let pairs = [
            ("kind", &self.kind),
            ("V", &self.v),
            ("m", &self.m),
            ("p", &self.p),
            ("q", &self.q),
            ("theta", &self.theta),
            ("h", &self.h),
            ("L", &self.len),
            ("boundary", &self.boundary),
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
        ];
        put(map, &pairs);
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(())
    }
}

fn put(map: &mut BTreeMap<String, String>, pairs: &[(&str, &Option<String>)]) {
    for (k, v) in pairs {
        if let Some(v) = v {
            map.insert(k.to_string(), v.clone());
        }
    }
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Spectrum { common, .. }
            | Command::Lyapunov { common, .. }
            | Command::AvilaScan { common, .. }
            | Command::DualityCheck { common, .. }
            | Command::Dini { common, .. }
            | Command::Thouless { common, .. }
            | Command::Dynamics { common, .. }
            | Command::TanCheck { common, .. }
            | Command::HatanoScan { common, .. }
            | Command::Report { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Lyapunov { .. } => "lyapunov",
            Command::AvilaScan { .. } => "avila-scan",
            Command::DualityCheck { .. } => "duality-check",
            Command::Dini { .. } => "dini",
            Command::Thouless { .. } => "thouless",
            Command::Dynamics { .. } => "dynamics",
            Command::TanCheck { .. } => "tan-check",
            Command::HatanoScan { .. } => "hatano-scan",
            Command::Report { .. } => "report",
        }
    }

    /// Subcommand flags as config keys.
    fn overrides(&self, map: &mut BTreeMap<String, String>) {
        match self {
            Command::Spectrum { residuals, samples, .. } => {
                if *residuals {
                    map.insert("residuals".into(), "true".into());
                }
                put(map, &[("samples", samples)]);
            }
            Command::Lyapunov { energies, method, n, vartheta, k_terms, .. } => put(
                map,
                &[
                    ("E", energies),
                    ("method", method),
                    ("n", n),
                    ("vartheta", vartheta),
                    ("k_terms", k_terms),
                ],
            ),
            Command::AvilaScan { energy, grid, n, .. } => {
                put(map, &[("E", energy), ("grid", grid), ("n", n)])
            }
            Command::DualityCheck { energies, n, k_terms, .. } => {
                put(map, &[("E", energies), ("n", n), ("k_terms", k_terms)])
            }
            Command::Dini { energies, points, .. } => put(map, &[("E", energies), ("points", points)]),
            Command::Thouless { energies, spectrum, .. } => {
                put(map, &[("E", energies), ("spectrum", spectrum)])
            }
            Command::Dynamics { t_max, steps, site, .. } => {
                put(map, &[("t_max", t_max), ("steps", steps), ("site", site)])
            }
            Command::TanCheck { energies, n, tol, .. } => put(map, &[("E", energies), ("n", n), ("tol", tol)]),
            Command::HatanoScan { h_grid, seeds, .. } => put(map, &[("h_grid", h_grid), ("seeds", seeds)]),
            Command::Report { inputs, tol, .. } => {
                if !inputs.is_empty() {
                    map.insert("inputs".into(), inputs.join(","));
                }
                put(map, &[("tol", tol)]);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovMethod {
    Transfer,
    Momentum,
    Thouless,
    Closed,
}

/// Fully parsed parameters of one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Spectrum { residuals: bool, samples: usize },
    Lyapunov { energies: Vec<Complex64>, method: LyapunovMethod, n: usize, vartheta: f64, k_terms: usize },
    AvilaScan { energy: Complex64, grid: Vec<f64>, n: usize },
    DualityCheck { energies: Option<Vec<Complex64>>, n: usize, k_terms: usize },
    Dini { energies: Vec<Complex64>, points: usize },
    Thouless { energies: Vec<Complex64>, spectrum: Option<PathBuf> },
    Dynamics { t_max: f64, steps: usize, site: usize },
    TanCheck { energies: Vec<Complex64>, n: usize, tol: f64 },
    HatanoScan { h_grid: Vec<f64>, seeds: usize },
    Report { inputs: Vec<PathBuf>, tol: f64, real_tol: f64, duality_tol: f64 },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Spectrum { .. } => "spectrum",
            Task::Lyapunov { .. } => "lyapunov",
            Task::AvilaScan { .. } => "avila-scan",
            Task::DualityCheck { .. } => "duality-check",
            Task::Dini { .. } => "dini",
            Task::Thouless { .. } => "thouless",
            Task::Dynamics { .. } => "dynamics",
            Task::TanCheck { .. } => "tan-check",
            Task::HatanoScan { .. } => "hatano-scan",
            Task::Report { .. } => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    /// Absent for subcommands that do not need a lattice.
    pub model: Option<ModelSpec>,
    pub output_dir: PathBuf,
    pub format: Format,
    /// Merged config keys as given, echoed into the manifest.
    pub raw: BTreeMap<String, String>,
}

const MODEL_KEYS: &[&str] = &["kind", "V", "m", "p", "q", "theta", "h", "L", "boundary", "seed", "out", "format"];

fn task_keys(sub: &str) -> &'static [&'static str] {
    match sub {
        "spectrum" => &["residuals", "samples"],
        "lyapunov" => &["E", "method", "n", "vartheta", "k_terms"],
        "avila-scan" => &["E", "grid", "n"],
        "duality-check" => &["E", "n", "k_terms"],
        "dini" => &["E", "points"],
        "thouless" => &["E", "spectrum"],
        "dynamics" => &["t_max", "steps", "site"],
        "tan-check" => &["E", "n", "tol"],
        "hatano-scan" => &["h_grid", "seeds"],
        "report" => &["inputs", "tol", "real_tol", "duality_tol"],
        _ => &[],
    }
}

/// Parses one complex number: `1.5`, `-2i`, `i`, `0.3-1e-2i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("bad complex number `{s}`"));
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(num(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let imag = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => num(x),
    };
    match split {
        Some(j) => Ok(Complex64::new(num(&body[..j])?, imag(&body[j..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    let out: Vec<Complex64> = s.split(',').filter(|x| !x.trim().is_empty()).map(parse_complex).collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Parse("empty energy list".into()));
    }
    Ok(out)
}

/// `start:stop:count` (endpoints included) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("bad grid `{s}`"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let grid = match parts.as_slice() {
        [a, b, n] => {
            let a: f64 = a.parse().map_err(|_| bad())?;
            let b: f64 = b.parse().map_err(|_| bad())?;
            let n: usize = n.parse().map_err(|_| bad())?;
            if n < 2 {
                return Err(bad());
            }
            (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect()
        }
        [_] => s
            .split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<f64>>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}

fn value<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad value `{s}` for `{key}`"))),
    }
}

fn energies(map: &BTreeMap<String, String>, default: Option<&str>) -> Result<Vec<Complex64>> {
    match (map.get("E"), default) {
        (Some(s), _) => parse_complex_list(s),
        (None, Some(d)) => parse_complex_list(d),
        (None, None) => Err(Error::Parse("missing energies (-E)".into())),
    }
}

fn resolve_model(map: &BTreeMap<String, String>, default_kind: ModelKind) -> Result<ModelSpec> {
    let kind = match map.get("kind") {
        Some(k) => k.parse()?,
        None => default_kind,
    };
    let boundary: Boundary = match map.get("boundary") {
        Some(b) => b.parse()?,
        None => Boundary::Periodic,
    };
    let seed = value(map, "seed", 0u64)?;
    if kind == ModelKind::HatanoNelson {
        let len = value(map, "L", DEFAULT_HN_LEN)?;
        let h = value(map, "h", 0.0)?;
        return Ok(ModelSpec::hatano_nelson(len, h, seed)?.with_boundary(boundary));
    }
    let (p, q) = match (map.get("p"), map.get("q")) {
        (Some(_), Some(_)) => (value(map, "p", 0u64)?, value(map, "q", 0u64)?),
        (None, None) => fibonacci_approximant(value(map, "m", DEFAULT_FIB_INDEX)?)?,
        _ => return Err(Error::Parse("give both p and q, or neither".into())),
    };
    let spec = ModelSpec {
        kind,
        v: value(map, "V", 0.5)?,
        p,
        q,
        theta: value(map, "theta", DEFAULT_THETA)?,
        h: value(map, "h", 0.0)?,
        len: value(map, "L", q as usize)?,
        boundary,
        seed,
    };
    spec.validate()?;
    Ok(spec)
}

impl ExperimentConfig {
    /// Builds a config for `subcommand` from merged `key=value` pairs.
    pub fn resolve(subcommand: &str, raw: BTreeMap<String, String>) -> Result<Self> {
        let allowed = task_keys(subcommand);
        if allowed.is_empty() {
            return Err(Error::Parse(format!("unknown subcommand `{subcommand}`")));
        }
        if let Some(k) = raw.keys().find(|k| !MODEL_KEYS.contains(&k.as_str()) && !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown key `{k}` for {subcommand}")));
        }
        let map = &raw;
        let format = match map.get("format").map(|s| s.to_ascii_lowercase()) {
            None => Format::Csv,
            Some(f) if f == "csv" => Format::Csv,
            Some(f) if f == "json" => Format::Json,
            Some(f) => return Err(Error::Parse(format!("unknown format `{f}`"))),
        };
        let output_dir = map
            .get("out")
            .cloned()
            .or_else(|| std::env::var(OUT_ENV).ok().filter(|s| !s.is_empty()))
            .unwrap_or_else(|| DEFAULT_OUT.into())
            .into();
        let positive = |key: &str, x: usize| {
            if x == 0 {
                Err(Error::Parse(format!("`{key}` must be positive")))
            } else {
                Ok(x)
            }
        };
        let (task, default_kind) = match subcommand {
            "spectrum" => (
                Task::Spectrum {
                    residuals: value(map, "residuals", false)?,
                    samples: positive("samples", value(map, "samples", 4096)?)?,
                },
                Some(ModelKind::ExpPotential),
            ),
            "lyapunov" => {
                let method = match map.get("method").map(String::as_str).unwrap_or("transfer") {
                    "transfer" => LyapunovMethod::Transfer,
                    "momentum" => LyapunovMethod::Momentum,
                    "thouless" => LyapunovMethod::Thouless,
                    "closed" => LyapunovMethod::Closed,
                    other => return Err(Error::Parse(format!("unknown method `{other}`"))),
                };
                (
                    Task::Lyapunov {
                        energies: energies(map, Some("0"))?,
                        method,
                        n: positive("n", value(map, "n", crate::transfer::DEFAULT_PRODUCT_LENGTH)?)?,
                        vartheta: value(map, "vartheta", 0.0)?,
                        k_terms: positive("k_terms", value(map, "k_terms", 100_000)?)?,
                    },
                    Some(ModelKind::ExpPotential),
                )
            }
            "avila-scan" => (
                Task::AvilaScan {
                    energy: parse_complex(map.get("E").map(String::as_str).unwrap_or("0"))?,
                    grid: parse_grid(map.get("grid").map(String::as_str).unwrap_or("0:3:31"))?,
                    n: positive("n", value(map, "n", 100_000)?)?,
                },
                Some(ModelKind::ExpPotential),
            ),
            "duality-check" => (
                Task::DualityCheck {
                    energies: map.get("E").map(|s| parse_complex_list(s)).transpose()?,
                    n: positive("n", value(map, "n", 100_000)?)?,
                    k_terms: positive("k_terms", value(map, "k_terms", 100_000)?)?,
                },
                Some(ModelKind::ExpPotential),
            ),
            "dini" => (
                Task::Dini {
                    energies: energies(map, None)?,
                    points: value(map, "points", 0)?,
                },
                None,
            ),
            "thouless" => {
                let spectrum: Option<PathBuf> = map.get("spectrum").map(PathBuf::from);
                let kind = if spectrum.is_some() { None } else { Some(ModelKind::ExpPotential) };
                (
                    Task::Thouless {
                        energies: energies(map, None)?,
                        spectrum,
                    },
                    kind,
                )
            }
            "dynamics" => {
                let t_max: f64 = value(map, "t_max", 200.0)?;
                if !(t_max > 0.0 && t_max.is_finite()) {
                    return Err(Error::Parse("`t_max` must be positive".into()));
                }
                (
                    Task::Dynamics {
                        t_max,
                        steps: value(map, "steps", 400)?,
                        site: value(map, "site", 0)?,
                    },
                    Some(ModelKind::ExpPotential),
                )
            }
            "tan-check" => (
                Task::TanCheck {
                    energies: energies(map, Some("0.3,-0.6,1.2,0.5i,0.4+1i"))?,
                    n: positive("n", value(map, "n", 100_000)?)?,
                    tol: value(map, "tol", 5e-2)?,
                },
                Some(ModelKind::TanPotential),
            ),
            "hatano-scan" => (
                Task::HatanoScan {
                    h_grid: parse_grid(map.get("h_grid").map(String::as_str).unwrap_or("0:1:21"))?,
                    seeds: value(map, "seeds", 8)?,
                },
                Some(ModelKind::HatanoNelson),
            ),
            "report" => {
                let inputs: Vec<PathBuf> = map
                    .get("inputs")
                    .map(|s| s.split(',').filter(|x| !x.trim().is_empty()).map(|x| PathBuf::from(x.trim())).collect())
                    .unwrap_or_default();
                if inputs.is_empty() {
                    return Err(Error::Parse("report needs at least one input file".into()));
                }
                (
                    Task::Report {
                        inputs,
                        tol: value(map, "tol", 1e-3)?,
                        real_tol: value(map, "real_tol", REAL_TOLERANCE)?,
                        duality_tol: value(map, "duality_tol", 2e-2)?,
                    },
                    None,
                )
            }
            _ => unreachable!("checked above"),
        };
        let model = default_kind.map(|k| resolve_model(map, k)).transpose()?;
        Ok(ExperimentConfig {
            task,
            model,
            output_dir,
            format,
            raw,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config: BTreeMap<String, String>,
    /// The resolved lattice, when the subcommand uses one.
    pub model: Option<BTreeMap<String, String>>,
    pub format: Format,
    pub wall_clock_seconds: f64,
    pub status: String,
    pub error: Option<ErrorRecord>,
    /// Emitted files relative to the output directory, in write order.
    pub files: Vec<FileRecord>,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            EXIT_COMPUTE
        } else {
            EXIT_OK
        }
    }

    /// Recomputes every checksum; returns the first mismatching file.
    pub fn verify(&self, dir: &Path) -> std::result::Result<(), String> {
        for f in &self.files {
            let bytes = fs::read(dir.join(&f.path)).map_err(|e| format!("{}: {e}", f.path))?;
            if sha256_hex(&bytes) != f.sha256 {
                return Err(f.path.clone());
            }
        }
        Ok(())
    }
}

fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

/// Writes result files and remembers their checksums.
struct Sink<'a> {
    dir: &'a Path,
    format: Format,
    files: Vec<FileRecord>,
}

impl Sink<'_> {
    fn write_raw(&mut self, name: String, bytes: &[u8]) -> Result<()> {
        atomic_write(&self.dir.join(&name), bytes)?;
        self.files.push(FileRecord {
            path: name,
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// `stem.csv` or `stem.json` depending on the configured format.
    fn write(&mut self, stem: &str, csv: impl FnOnce() -> String, json: impl FnOnce() -> Value) -> Result<()> {
        match self.format {
            Format::Csv => self.write_raw(format!("{stem}.csv"), csv().as_bytes()),
            Format::Json => self.write_json(stem, &json()),
        }
    }

    fn write_json(&mut self, stem: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
        text.push('\n');
        self.write_raw(format!("{stem}.json"), text.as_bytes())
    }

    fn table(&mut self, stem: &str, meta: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let csv = || {
            let mut out = String::new();
            if !meta.is_empty() {
                out.push_str(&format!("# {meta}\n"));
            }
            out.push_str(&columns.join(","));
            out.push('\n');
            for r in rows {
                let fields: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            out
        };
        let json = || json!({ "meta": meta, "columns": columns, "rows": rows });
        self.write(stem, csv, json)
    }

    fn spectrum(&mut self, stem: &str, s: &Spectrum) -> Result<()> {
        self.write(stem, || s.to_csv(), || serde_json::to_value(s).expect("spectrum serializes"))
    }

    fn curve(&mut self, stem: &str, c: &AnalyticCurve) -> Result<()> {
        self.write(stem, || c.to_csv(), || serde_json::to_value(c).expect("curve serializes"))
    }
}

/// Executes one configured run, writing results and then the manifest.
/// Computation errors are recorded in the returned manifest; only a failure
/// to write the manifest itself is returned as an error.
pub fn run(config: &ExperimentConfig) -> Result<RunManifest> {
    let start = Instant::now();
    fs::create_dir_all(&config.output_dir)?;
    let mut sink = Sink {
        dir: &config.output_dir,
        format: config.format,
        files: Vec::new(),
    };
    let outcome = execute(config, &mut sink);
    let manifest = RunManifest {
        tool: "nhlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: config.task.name().into(),
        config: config.raw.clone(),
        model: config.model.as_ref().map(|m| parse_kv(&m.to_kv()).expect("spec round trips")),
        format: config.format,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        status: if outcome.is_ok() { "ok" } else { "error" }.into(),
        error: outcome.err().map(|e| ErrorRecord {
            kind: error_kind(&e),
            message: e.to_string(),
        }),
        files: sink.files,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    atomic_write(&config.output_dir.join(MANIFEST_NAME), text.as_bytes())?;
    Ok(manifest)
}

fn model_of(config: &ExperimentConfig) -> &ModelSpec {
    config.model.as_ref().expect("subcommand resolves a model")
}

fn execute(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    match &config.task {
        Task::Spectrum { residuals, samples } => run_spectrum(model_of(config), *residuals, *samples, sink),
        Task::Lyapunov { energies, method, n, vartheta, k_terms } => {
            run_lyapunov(model_of(config), energies, *method, *n, *vartheta, *k_terms, sink)
        }
        Task::AvilaScan { energy, grid, n } => {
            let scan = avila_scan(model_of(config), *energy, grid, *n)?;
            sink.write("scan", || scan.to_csv(), || serde_json::to_value(&scan).expect("scan serializes"))?;
            sink.write_json(
                "summary",
                &json!({
                    "subcommand": "avila-scan",
                    "energy": [energy.re, energy.im],
                    "slopes": scan.slopes(),
                    "breakpoints": scan.breakpoints,
                    "fit_residual": scan.residual,
                    "slope_deviation": scan.slope_deviation(),
                    "monotone": scan.is_monotone(),
                    "convex": scan.is_convex(),
                }),
            )
        }
        Task::DualityCheck { energies, n, k_terms } => {
            run_duality(model_of(config), energies.as_deref(), *n, *k_terms, sink)
        }
        Task::Dini { energies, points } => {
            let mut columns = vec!["re", "im", "dini"];
            if *points > 0 {
                columns.push("quadrature");
            }
            let rows = energies
                .iter()
                .map(|e| {
                    let mut row = vec![e.re, e.im, dini_integral(*e)];
                    if *points > 0 {
                        row.push(dini_quadrature(*e, *points)?);
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            sink.table("dini", "", &columns, &rows)
        }
        Task::Thouless { energies, spectrum } => {
            let values = match spectrum {
                Some(path) => read_point_set(path)?.points,
                None => eigenvalues(&model::build(model_of(config))?.densify())?.values,
            };
            let rows = energies
                .iter()
                .map(|e| Ok(vec![e.re, e.im, thouless_estimate(&values, *e)?.gamma]))
                .collect::<Result<Vec<_>>>()?;
            sink.table("thouless", &format!("L={}", values.len()), &["re", "im", "gamma"], &rows)
        }
        Task::Dynamics { t_max, steps, site } => run_dynamics(model_of(config), *t_max, *steps, *site, sink),
        Task::TanCheck { energies, n, tol } => run_tan_check(model_of(config), energies, *n, *tol, sink),
        Task::HatanoScan { h_grid, seeds } => {
            let report = hatano_regime_scan(model_of(config), h_grid, *seeds)?;
            sink.write("scan", || report.to_csv(), || serde_json::to_value(&report).expect("report serializes"))?;
            let mut summary = report.summary_json();
            summary["subcommand"] = json!("hatano-scan");
            summary["monotonicity_violation"] = json!(report.monotonicity_violation());
            sink.write_json("summary", &summary)
        }
        Task::Report { inputs, tol, real_tol, duality_tol } => run_report(inputs, *tol, *real_tol, *duality_tol, sink),
    }
}

fn closed_form_curve(spec: &ModelSpec, samples: usize) -> Result<Option<AnalyticCurve>> {
    if spec.v <= 0.0 || spec.boundary != Boundary::Periodic {
        return Ok(None);
    }
    Ok(match spec.kind {
        ModelKind::ExpPotential => Some(analytic_spectrum_exp(spec.v, samples)?),
        ModelKind::TanPotential => Some(analytic_spectrum_tan(spec.v, samples)?),
        ModelKind::HatanoNelson => None,
    })
}

fn run_spectrum(spec: &ModelSpec, residuals: bool, samples: usize, sink: &mut Sink) -> Result<()> {
    let m = model::build(spec)?.densify();
    let mut s = if residuals { eigenpairs(&m)? } else { eigenvalues(&m)? };
    // Vectors are only needed for the residuals; they would dominate the JSON.
    s.vectors = None;
    sink.spectrum("spectrum", &s)?;
    if let Some(curve) = closed_form_curve(spec, samples)? {
        sink.curve("curve", &curve)?;
    }
    let max_abs_imag = s.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    sink.write_json(
        "summary",
        &json!({
            "subcommand": "spectrum",
            "L": s.len(),
            "real_fraction": real_fraction(&s.values, REAL_TOLERANCE),
            "max_abs_imag": max_abs_imag,
            "max_residual": s.residuals.as_ref().map(|r| r.iter().cloned().fold(0.0, f64::max)),
            "flagged": s.defective,
        }),
    )
}

fn run_lyapunov(
    spec: &ModelSpec,
    energies: &[Complex64],
    method: LyapunovMethod,
    n: usize,
    vartheta: f64,
    k_terms: usize,
    sink: &mut Sink,
) -> Result<()> {
    let spectrum = match method {
        LyapunovMethod::Thouless => Some(eigenvalues(&model::build(spec)?.densify())?.values),
        _ => None,
    };
    let estimate = |e: Complex64| -> Result<LyapunovEstimate> {
        match method {
            LyapunovMethod::Transfer => lyapunov_position_with(
                spec,
                e,
                vartheta,
                &PositionOptions {
                    n,
                    ..PositionOptions::default()
                },
            ),
            LyapunovMethod::Momentum => match spec.kind {
                ModelKind::ExpPotential => lyapunov_momentum_product(spec, e, k_terms),
                ModelKind::TanPotential => build_dual_tan(spec, e)?.lyapunov(k_terms),
                ModelKind::HatanoNelson => Err(Error::InvalidSpec("no momentum recursion for Hatano-Nelson".into())),
            },
            LyapunovMethod::Thouless => thouless_estimate(spectrum.as_deref().expect("computed above"), e),
            LyapunovMethod::Closed => match spec.kind {
                ModelKind::ExpPotential => Ok(LyapunovEstimate::exact(gamma_position_closed(spec.v), Method::ClosedForm, 0)),
                ModelKind::TanPotential => Ok(LyapunovEstimate::exact(gamma_tan_closed(e, spec.v), Method::ClosedForm, 0)),
                ModelKind::HatanoNelson => Err(Error::InvalidSpec("no closed form for Hatano-Nelson".into())),
            },
        }
    };
    let rows = energies
        .iter()
        .map(|&e| estimate(e).map(|est| vec![e.re, e.im, est.gamma, est.stderr]))
        .collect::<Result<Vec<_>>>()?;
    let meta = format!("method={method:?} vartheta={vartheta}").to_lowercase();
    sink.table("lyapunov", &meta, &["re", "im", "gamma", "stderr"], &rows)
}

/// Probe energies on the closed-form spectrum, away from `k = 0`.
fn default_duality_energies(v: f64) -> Vec<Complex64> {
    (0..5)
        .map(|j| {
            let k = 0.3 + std::f64::consts::TAU * j as f64 / 5.0;
            if v <= 1.0 {
                Complex64::new(2.0 * k.cos(), 0.0)
            } else {
                loop_point(v, k)
            }
        })
        .collect()
}

fn run_duality(spec: &ModelSpec, energies: Option<&[Complex64]>, n: usize, k_terms: usize, sink: &mut Sink) -> Result<()> {
    let position = eigenvalues(&model::build(spec)?.densify())?;
    let mut dual = eigenvalues(&build_dual_exp(spec)?.densify())?;
    for z in &mut dual.values {
        *z *= spec.v;
    }
    let hausdorff = spectral_distance(&position.values, &dual.values)?;
    sink.spectrum("position", &position)?;
    sink.spectrum("dual", &dual)?;
    let probes = energies.map_or_else(|| default_duality_energies(spec.v), <[Complex64]>::to_vec);
    let opts = PositionOptions {
        n,
        ..PositionOptions::default()
    };
    let rows = probes
        .iter()
        .map(|&e| {
            let g = lyapunov_position_with(spec, e, 0.0, &opts)?.gamma;
            let gm = lyapunov_momentum_product(spec, e, k_terms)?.gamma;
            Ok(vec![e.re, e.im, g, gm, crate::analytic::duality_relation_residual(g, gm, spec.v)])
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = rows.iter().map(|r| r[4]).fold(0.0, f64::max);
    sink.table("relation", "", &["re", "im", "gamma", "gamma_m", "residual"], &rows)?;
    sink.write_json(
        "summary",
        &json!({
            "subcommand": "duality-check",
            "V": spec.v,
            "L": spec.len,
            "hausdorff": hausdorff,
            "max_relation_residual": max_residual,
        }),
    )
}

fn run_dynamics(spec: &ModelSpec, t_max: f64, steps: usize, site: usize, sink: &mut Sink) -> Result<()> {
    let h = model::build(spec)?;
    if site >= h.len() {
        return Err(Error::InvalidArgument(format!("site {site} outside 0..{}", h.len())));
    }
    let mut psi0 = vec![Complex64::new(0.0, 0.0); h.len()];
    psi0[site] = Complex64::new(1.0, 0.0);
    let evo = evolve_norm(&h, &psi0, &time_grid(t_max, steps))?;
    let rows: Vec<Vec<f64>> = evo.times.iter().zip(&evo.log_norms).map(|(t, l)| vec![*t, *l]).collect();
    sink.table("norms", &format!("site={site}"), &["t", "log_norm"], &rows)?;
    sink.write_json(
        "summary",
        &json!({
            "subcommand": "dynamics",
            "growth_exponent": evo.growth_exponent,
            "max_imag": evo.max_imag,
            "difference": (evo.growth_exponent - evo.max_imag).abs(),
            "basis_condition": evo.basis_condition,
        }),
    )
}

fn run_tan_check(spec: &ModelSpec, energies: &[Complex64], n: usize, tol: f64, sink: &mut Sink) -> Result<()> {
    if spec.kind != ModelKind::TanPotential {
        return Err(Error::InvalidSpec("tan-check needs kind=tan".into()));
    }
    let s = eigenvalues(&model::build(spec)?.densify())?;
    let near = s.values.iter().filter(|e| distance_to_tan_set(**e, spec.v) <= tol).count();
    let fraction = near as f64 / s.len() as f64;
    sink.spectrum("spectrum", &s)?;
    sink.curve("curve", &analytic_spectrum_tan(spec.v, 2048)?)?;
    let opts = PositionOptions {
        n,
        ..PositionOptions::default()
    };
    let rows = energies
        .iter()
        .map(|&e| {
            let g = lyapunov_position_with(spec, e, 0.0, &opts)?;
            Ok(vec![e.re, e.im, g.gamma, g.stderr, gamma_tan_closed(e, spec.v)])
        })
        .collect::<Result<Vec<_>>>()?;
    let max_gamma_error = rows.iter().map(|r| (r[2] - r[4]).abs()).fold(0.0, f64::max);
    sink.table("gamma", "", &["re", "im", "gamma", "stderr", "gamma_closed"], &rows)?;
    sink.write_json(
        "summary",
        &json!({
            "subcommand": "tan-check",
            "conjecture": true,
            "near_fraction": fraction,
            "distance_tol": tol,
            "spectrum_agrees": fraction >= 0.99,
            "max_gamma_error": max_gamma_error,
            "gamma_agrees": max_gamma_error <= 0.02,
        }),
    )
}

/// A spectrum or curve loaded for comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub curve: Option<CurveKind>,
    pub points: Vec<Complex64>,
    samples: Vec<(f64, Complex64)>,
    v: f64,
}

impl PointSet {
    fn spectrum(points: Vec<Complex64>) -> Self {
        PointSet { curve: None, points, samples: Vec::new(), v: f64::NAN }
    }

    fn from_curve(c: AnalyticCurve) -> Self {
        PointSet { curve: Some(c.kind), points: c.points(), samples: c.samples, v: c.v }
    }

    pub fn as_curve(&self) -> Option<AnalyticCurve> {
        self.curve.map(|kind| AnalyticCurve {
            kind,
            v: self.v,
            samples: self.samples.clone(),
            conjecture: kind == CurveKind::TanConjecture,
        })
    }
}

/// Reads a spectrum or curve file written by any subcommand, CSV or JSON.
pub fn read_point_set(path: &Path) -> Result<PointSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let header = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    if header.starts_with('{') {
        if let Ok(s) = serde_json::from_str::<Spectrum>(&text) {
            return Ok(PointSet::spectrum(s.values));
        }
        if let Ok(c) = serde_json::from_str::<AnalyticCurve>(&text) {
            return Ok(PointSet::from_curve(c));
        }
        return Err(Error::SchemaMismatch(format!("{}: neither a spectrum nor a curve", path.display())));
    }
    match header {
        "re,im,residual" => Ok(PointSet::spectrum(Spectrum::from_csv(&text)?.values)),
        "k,re,im" => Ok(PointSet::from_curve(AnalyticCurve::from_csv(&text)?)),
        other => Err(Error::SchemaMismatch(format!("{}: unexpected header `{other}`", path.display()))),
    }
}

fn run_report(inputs: &[PathBuf], tol: f64, real_tol: f64, duality_tol: f64, sink: &mut Sink) -> Result<()> {
    let mut sets = Vec::new();
    let mut duality = Vec::new();
    for path in inputs {
        let is_summary = fs::read_to_string(path)
            .ok()
            .and_then(|t| serde_json::from_str::<Value>(&t).ok())
            .filter(|v| v.get("subcommand") == Some(&json!("duality-check")));
        match is_summary {
            Some(v) => duality.push((path, v)),
            None => sets.push((path, read_point_set(path)?)),
        }
    }
    let mut pass = true;
    let mut entries = Vec::new();
    for (path, set) in &sets {
        let fraction = set.curve.is_none().then(|| real_fraction(&set.points, real_tol));
        entries.push(json!({
            "path": path.display().to_string(),
            "curve": set.curve.map(CurveKind::as_str),
            "points": set.points.len(),
            "real_fraction": fraction,
        }));
    }
    // A curve of kind RealBand asserts the spectra next to it are real.
    if sets.iter().any(|(_, s)| s.curve == Some(CurveKind::RealBand)) {
        pass &= sets
            .iter()
            .filter(|(_, s)| s.curve.is_none())
            .all(|(_, s)| real_fraction(&s.points, real_tol) == 1.0);
    }
    let mut distance = Value::Null;
    let mut metric = Value::Null;
    if let [(_, a), (_, b), ..] = sets.as_slice() {
        // Spectrum against curve: every eigenvalue must lie on the curve, but
        // a finite spectrum cannot cover the whole curve.
        let onto = |s: &PointSet, c: &PointSet| -> Result<f64> {
            let curve = c.as_curve().expect("checked curve");
            if s.points.is_empty() {
                return Err(Error::EmptySet);
            }
            Ok(s.points.iter().map(|e| curve.distance_to(*e)).fold(0.0, f64::max))
        };
        let (d, m) = match (a.curve, b.curve) {
            (None, Some(_)) => (onto(a, b)?, "directed"),
            (Some(_), None) => (onto(b, a)?, "directed"),
            _ => (spectral_distance(&a.points, &b.points)?, "hausdorff"),
        };
        pass &= d <= tol;
        distance = json!(d);
        metric = json!(m);
    }
    let mut relations = Vec::new();
    for (path, v) in &duality {
        let r = v["max_relation_residual"].as_f64().unwrap_or(f64::NAN);
        pass &= r <= duality_tol;
        relations.push(json!({
            "path": path.display().to_string(),
            "hausdorff": v["hausdorff"],
            "max_relation_residual": r,
        }));
    }
    let report = json!({
        "subcommand": "report",
        "inputs": entries,
        "distance": distance,
        "metric": metric,
        "duality": relations,
        "tolerances": { "distance": tol, "real": real_tol, "duality": duality_tol },
        "pass": pass,
    });
    sink.write_json("report", &report)
}

/// Parses arguments, runs, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let config = match config_from_cli(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("nhlab: {e}");
            return EXIT_CONFIG;
        }
    };
    match run(&config) {
        Ok(manifest) => {
            if let Some(err) = &manifest.error {
                eprintln!("nhlab: {}: {}", err.kind, err.message);
            } else {
                // A closed stdout is not a failed run.
                let _ = writeln!(std::io::stdout(), "{}", config.output_dir.join(MANIFEST_NAME).display());
            }
            manifest.exit_code()
        }
        Err(e) => {
            eprintln!("nhlab: cannot write results: {e}");
            EXIT_COMPUTE
        }
    }
}

/// Merges the config file with command-line overrides.
pub fn config_from_cli(cli: &Cli) -> Result<ExperimentConfig> {
    let common = cli.command.common();
    let mut map = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            parse_kv(&text)?
        }
        None => BTreeMap::new(),
    };
    common.overrides(&mut map)?;
    cli.command.overrides(&mut map);
    ExperimentConfig::resolve(cli.command.name(), map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1.5").unwrap(), c(1.5, 0.0));
        assert_eq!(parse_complex("-2i").unwrap(), c(0.0, -2.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("0.3-1e-2i").unwrap(), c(0.3, -0.01));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), c(1e-3, 20.0));
        assert_eq!(parse_complex(" -1 + i ").unwrap(), c(-1.0, 1.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+2j").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0, 0.25,2").unwrap(), vec![0.0, 0.25, 2.0]);
        assert!(parse_grid("0:1:1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("").is_err());
    }

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn model_defaults_and_overrides() {
        let cfg = ExperimentConfig::resolve("spectrum", map(&[("m", "10"), ("out", "x")])).unwrap();
        let spec = cfg.model.unwrap();
        assert_eq!((spec.p, spec.q, spec.len), (34, 55, 55));
        assert_eq!(spec.kind, ModelKind::ExpPotential);
        assert_eq!(spec.theta, DEFAULT_THETA);
        let cfg = ExperimentConfig::resolve("hatano-scan", map(&[("L", "21"), ("out", "x")])).unwrap();
        assert_eq!(cfg.model.unwrap().kind, ModelKind::HatanoNelson);
        let cfg = ExperimentConfig::resolve("dini", map(&[("E", "0"), ("out", "x")])).unwrap();
        assert!(cfg.model.is_none());
    }

    #[test]
    fn config_errors() {
        for (sub, pairs) in [
            ("spectrum", vec![("bogus", "1")]),
            ("spectrum", vec![("V", "x")]),
            ("spectrum", vec![("p", "3")]),
            ("spectrum", vec![("format", "xml")]),
            ("dini", vec![]),
            ("report", vec![]),
            ("lyapunov", vec![("method", "guess")]),
            ("nope", vec![]),
        ] {
            assert!(ExperimentConfig::resolve(sub, map(&pairs)).is_err(), "{sub} {pairs:?}");
        }
    }

    #[test]
    fn command_line_beats_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("run.cfg");
        fs::write(&cfg_path, "V=2\nm=10\nE=1,2\n").unwrap();
        let cli = Cli::try_parse_from([
            "nhlab",
            "lyapunov",
            "--config",
            cfg_path.to_str().unwrap(),
            "-V",
            "0.5",
            "--set",
            "n=5000",
        ])
        .unwrap();
        let cfg = config_from_cli(&cli).unwrap();
        assert_eq!(cfg.model.as_ref().unwrap().v, 0.5);
        assert_eq!(cfg.model.as_ref().unwrap().q, 55);
        match cfg.task {
            Task::Lyapunov { energies, n, .. } => {
                assert_eq!(energies, vec![c(1.0, 0.0), c(2.0, 0.0)]);
                assert_eq!(n, 5000);
            }
            other => panic!("unexpected task {other:?}"),
        }
    }

    #[test]
    fn dini_run_writes_manifest_last() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let code = main_with_args(["nhlab", "dini", "-E", "0,2.5", "-o", out.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        let text = fs::read_to_string(out.join("dini.csv")).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0,0,0");
        let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(out.join(MANIFEST_NAME)).unwrap()).unwrap();
        assert_eq!(manifest.files.len(), 1);
        manifest.verify(&out).unwrap();
    }

    #[test]
    fn error_kinds() {
        assert_eq!(error_kind(&Error::ZeroState), "ZeroState");
        assert_eq!(error_kind(&Error::Resonance { k: 3 }), "Resonance");
        assert_eq!(error_kind(&Error::Parse("x".into())), "Parse");
    }
}
