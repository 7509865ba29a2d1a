//! Lattice models and their Hamiltonians.
//!
//! All models share the nearest-neighbour difference equation
//!
//! ```text
//! t_L ψ_{n+1} + t_R ψ_{n-1} + U_n ψ_n = E ψ_n,      n = 1..L
//! ```
//!
//! where `t_R` is the amplitude for hopping one site to the right (it sits
//! on the subdiagonal, `M[n+1][n]`) and `t_L` the amplitude for hopping one
//! site to the left (superdiagonal, `M[n][n+1]`). The quasiperiodic models
//! have `t_L = t_R = 1`; Hatano–Nelson has `t_R = e^{h}`, `t_L = e^{-h}`.
//!
//! A periodic ring closes with a twist `τ`: `ψ_0 = τ ψ_L` and
//! `ψ_{L+1} = τ⁻¹ ψ_1`. Ordinary rings have `τ = 1`; the gauge-transformed
//! dual of the exponential model carries `τ = e^{iLθ}`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Golden-mean frequency `(√5 − 1)/2`.
pub const GOLDEN_ALPHA: f64 = 0.618_033_988_749_894_8;

/// Exclusion radius (radians) around poles of the tangent potential.
pub const TAN_POLE_EXCLUSION: f64 = 1e-6;

pub const DEFAULT_THETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    ExpPotential,
    TanPotential,
    HatanoNelson,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::ExpPotential => "exp",
            ModelKind::TanPotential => "tan",
            ModelKind::HatanoNelson => "hatano-nelson",
        }
    }

    pub fn is_quasiperiodic(self) -> bool {
        !matches!(self, ModelKind::HatanoNelson)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exp" | "exppotential" => Ok(ModelKind::ExpPotential),
            "tan" | "tanpotential" => Ok(ModelKind::TanPotential),
            "hatano-nelson" | "hn" | "hatanonelson" => Ok(ModelKind::HatanoNelson),
            other => Err(Error::Parse(format!("unknown model kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
    Open,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            "open" | "obc" => Ok(Boundary::Open),
            other => Err(Error::Parse(format!("unknown boundary `{other}`"))),
        }
    }
}

/// Returns `(F_{m-1}, F_m)` with `F_1 = F_2 = 1`.
pub fn fibonacci_approximant(m: usize) -> Result<(u64, u64)> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "Fibonacci index must be at least 2, got {m}"
        )));
    }
    let (mut prev, mut cur) = (1u64, 1u64);
    for _ in 2..m {
        let next = prev.checked_add(cur).ok_or(Error::Overflow(m))?;
        prev = cur;
        cur = next;
    }
    Ok((prev, cur))
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Full description of one lattice instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Potential strength. Zero is accepted and gives the free lattice.
    pub v: f64,
    pub p: u64,
    pub q: u64,
    pub theta: f64,
    /// Imaginary gauge field (Hatano–Nelson only).
    pub h: f64,
    pub len: usize,
    pub boundary: Boundary,
    pub seed: u64,
}

impl ModelSpec {
    /// Quasiperiodic ring with `α ≃ F_{m-1}/F_m` and `L = F_m`.
    pub fn quasiperiodic(kind: ModelKind, v: f64, fib_index: usize) -> Result<Self> {
        let (p, q) = fibonacci_approximant(fib_index)?;
        let spec = ModelSpec {
            kind,
            v,
            p,
            q,
            theta: DEFAULT_THETA,
            h: 0.0,
            len: q as usize,
            boundary: Boundary::Periodic,
            seed: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn exp(v: f64, fib_index: usize) -> Result<Self> {
        Self::quasiperiodic(ModelKind::ExpPotential, v, fib_index)
    }

    pub fn tan(v: f64, fib_index: usize) -> Result<Self> {
        Self::quasiperiodic(ModelKind::TanPotential, v, fib_index)
    }

    pub fn hatano_nelson(len: usize, h: f64, seed: u64) -> Result<Self> {
        let spec = ModelSpec {
            kind: ModelKind::HatanoNelson,
            v: 1.0,
            p: 1,
            q: 2,
            theta: 0.0,
            h,
            len,
            boundary: Boundary::Periodic,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_len(mut self, len: usize) -> Self {
        self.len = len;
        self
    }

    /// Rational frequency `p/q`.
    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !(self.v.is_finite() && self.v >= 0.0) {
            return bad(format!("V must be a finite non-negative real, got {}", self.v));
        }
        if !self.theta.is_finite() || !self.h.is_finite() {
            return bad("theta and h must be finite".into());
        }
        if self.len < 3 {
            return bad(format!("L must be at least 3, got {}", self.len));
        }
        if self.kind.is_quasiperiodic() {
            if !(0 < self.p && self.p < self.q) {
                return bad(format!("need 0 < p < q, got p = {}, q = {}", self.p, self.q));
            }
            if gcd(self.p, self.q) != 1 {
                return bad(format!("p = {} and q = {} are not coprime", self.p, self.q));
            }
            match self.boundary {
                Boundary::Periodic if self.len as u64 != self.q => {
                    return bad(format!(
                        "periodic quasiperiodic ring needs L = q, got L = {}, q = {}",
                        self.len, self.q
                    ));
                }
                Boundary::Open if self.len as u64 > self.q => {
                    return bad(format!("open chain needs L <= q, got L = {}", self.len));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Phase `2π (p/q) n` reduced exactly through integer arithmetic.
    pub(crate) fn rational_phase(&self, n: i64) -> f64 {
        let q = self.q as i128;
        let r = ((self.p as i128 * n as i128) % q + q) % q;
        TAU * (r as f64) / (self.q as f64)
    }

    /// Serializes to the flat `key=value` form, one key per line.
    pub fn to_kv(&self) -> String {
        self.to_string()
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let map = parse_kv(text)?;
        Self::from_map(&map)
    }

    pub(crate) fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| {
            map.get(key)
                .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
        };
        fn num<T: FromStr>(key: &str, s: &str) -> Result<T> {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad value `{s}` for `{key}`")))
        }
        let spec = ModelSpec {
            kind: get("kind")?.parse()?,
            v: num("V", get("V")?)?,
            p: num("p", get("p")?)?,
            q: num("q", get("q")?)?,
            theta: num("theta", get("theta")?)?,
            h: num("h", get("h")?)?,
            len: num("L", get("L")?)?,
            boundary: get("boundary")?.parse()?,
            seed: num("seed", get("seed")?)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind={}", self.kind.as_str())?;
        writeln!(f, "V={}", self.v)?;
        writeln!(f, "p={}", self.p)?;
        writeln!(f, "q={}", self.q)?;
        writeln!(f, "theta={}", self.theta)?;
        writeln!(f, "h={}", self.h)?;
        writeln!(f, "L={}", self.len)?;
        writeln!(f, "boundary={}", self.boundary.as_str())?;
        writeln!(f, "seed={}", self.seed)
    }
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Banded-with-corners lattice Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub onsite: Vec<Complex64>,
    /// Amplitude for hopping `n → n+1`; coefficient of `ψ_{n-1}` in row `n`.
    pub hop_right: Complex64,
    /// Amplitude for hopping `n+1 → n`; coefficient of `ψ_{n+1}` in row `n`.
    pub hop_left: Complex64,
    pub boundary: Boundary,
    /// Ring closure `ψ_0 = twist · ψ_L`. Ignored for open chains.
    pub twist: Complex64,
}

impl Hamiltonian {
    pub fn len(&self) -> usize {
        self.onsite.len()
    }

    pub fn is_empty(&self) -> bool {
        self.onsite.is_empty()
    }

    /// Dense matrix with rows and columns indexed `0..L` for sites `1..L`.
    ///
    /// `M[n][n] = U_n`, `M[n][n+1] = hop_left`, `M[n+1][n] = hop_right`.
    /// For a periodic ring the corners are `M[0][L-1] = hop_right·τ` and
    /// `M[L-1][0] = hop_left/τ`.
    pub fn densify(&self) -> CMatrix {
        let l = self.len();
        let mut m = CMatrix::from_diagonal(&self.onsite);
        for n in 0..l.saturating_sub(1) {
            m[(n, n + 1)] += self.hop_left;
            m[(n + 1, n)] += self.hop_right;
        }
        if self.boundary == Boundary::Periodic && l > 1 {
            m[(0, l - 1)] += self.hop_right * self.twist;
            m[(l - 1, 0)] += self.hop_left / self.twist;
        }
        m
    }

    /// Applies the three-term recursion site by site, without forming a matrix.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let l = self.len();
        assert_eq!(psi.len(), l, "state length must equal L");
        let zero = Complex64::new(0.0, 0.0);
        let periodic = self.boundary == Boundary::Periodic;
        (0..l)
            .map(|n| {
                let below = if n > 0 {
                    psi[n - 1]
                } else if periodic {
                    self.twist * psi[l - 1]
                } else {
                    zero
                };
                let above = if n + 1 < l {
                    psi[n + 1]
                } else if periodic {
                    psi[0] / self.twist
                } else {
                    zero
                };
                self.hop_left * above + self.hop_right * below + self.onsite[n] * psi[n]
            })
            .collect()
    }
}

/// Builds the Hamiltonian for any model kind.
pub fn build(spec: &ModelSpec) -> Result<Hamiltonian> {
    match spec.kind {
        ModelKind::ExpPotential => build_exp_model(spec),
        ModelKind::TanPotential => build_tan_model(spec),
        ModelKind::HatanoNelson => build_hatano_nelson(spec),
    }
}

fn unit_hopping(onsite: Vec<Complex64>, boundary: Boundary) -> Hamiltonian {
    let one = Complex64::new(1.0, 0.0);
    Hamiltonian {
        onsite,
        hop_right: one,
        hop_left: one,
        boundary,
        twist: one,
    }
}

fn require_kind(spec: &ModelSpec, kind: ModelKind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(Error::InvalidSpec(format!(
            "expected a {} model, got {}",
            kind.as_str(),
            spec.kind.as_str()
        )));
    }
    Ok(())
}

/// `U_n = V exp(i(−2π(p/q)n + θ))`.
pub fn build_exp_model(spec: &ModelSpec) -> Result<Hamiltonian> {
    require_kind(spec, ModelKind::ExpPotential)?;
    let onsite = (1..=spec.len as i64)
        .map(|n| Complex64::from_polar(spec.v, spec.theta - spec.rational_phase(n)))
        .collect();
    Ok(unit_hopping(onsite, spec.boundary))
}

/// Distance from `phase` to the nearest odd multiple of π/2.
pub(crate) fn distance_to_tan_pole(phase: f64) -> f64 {
    let x = phase - FRAC_PI_2;
    (x - PI * (x / PI).round()).abs()
}

/// `U_n = i V tan(2π(p/q)n + θ)`.
pub fn build_tan_model(spec: &ModelSpec) -> Result<Hamiltonian> {
    require_kind(spec, ModelKind::TanPotential)?;
    let onsite = (1..=spec.len as i64)
        .map(|n| {
            let phase = spec.rational_phase(n) + spec.theta;
            let distance = distance_to_tan_pole(phase);
            if distance <= TAN_POLE_EXCLUSION {
                return Err(Error::SingularPhase { site: n, distance });
            }
            Ok(Complex64::new(0.0, spec.v * phase.tan()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(unit_hopping(onsite, spec.boundary))
}

/// Uniform disorder on `[-1, 1]`.
///
/// Draws come from SplitMix64 with its state initialized to `seed`: each
/// draw adds `0x9E3779B97F4A7C15` to the state and mixes it; the top 53 bits
/// of the output give `u ∈ [0, 1)` and the onsite energy is `2u − 1`.
pub fn disorder_potential(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            2.0 * u - 1.0
        })
        .collect()
}

pub fn build_hatano_nelson(spec: &ModelSpec) -> Result<Hamiltonian> {
    require_kind(spec, ModelKind::HatanoNelson)?;
    let onsite = disorder_potential(spec.len, spec.seed)
        .into_iter()
        .map(|u| Complex64::new(u, 0.0))
        .collect();
    Ok(Hamiltonian {
        onsite,
        hop_right: Complex64::new(spec.h.exp(), 0.0),
        hop_left: Complex64::new((-spec.h).exp(), 0.0),
        boundary: spec.boundary,
        twist: Complex64::new(1.0, 0.0),
    })
}

/// Convenience: build and densify in one step.
pub fn densify(h: &Hamiltonian) -> CMatrix {
    h.densify()
}
