//! Numerical laboratory for real and complex spectra of non-Hermitian
//! one-dimensional lattices.
//!
//! Three models are provided: a ring with the one-sided quasiperiodic
//! potential `V exp(i(-2παn + θ))`, its tangent cousin `iV tan(2παn + θ)`,
//! and the disordered Hatano–Nelson ring with asymmetric hopping `e^{±h}`.
//! Everything needed to decide whether a spectrum is real is built here:
//!
//! - [`model`]: Hamiltonian builders with Fibonacci approximants `p/q` of
//!   the golden frequency, densification to a full matrix.
//! - [`eigensolver`]: dense complex balancing, Hessenberg reduction,
//!   shifted QR and inverse iteration.
//! - [`transfer`]: position-space Lyapunov exponents from 2×2 transfer
//!   matrix products, including complexified phases and integer-slope
//!   (acceleration) extraction.
//! - [`duality`]: the Fourier map to momentum space, dual Hamiltonians and
//!   momentum-space Lyapunov exponents.
//! - [`analytic`]: closed-form spectra, the Dini integral, the Thouless
//!   formula over a numerical spectrum and closed-form exponents.
//! - [`diagnostics`]: IPR, decay fits, Hausdorff distances, real fractions,
//!   norm growth under time evolution and Hatano–Nelson regime scans.
//! - [`cli`]: the experiment runner behind the `nhlab` binary.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod analytic;
pub mod cli;
pub mod diagnostics;
pub mod duality;
pub mod eigensolver;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod transfer;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use model::{Boundary, Hamiltonian, ModelKind, ModelSpec};
