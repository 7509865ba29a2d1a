//! Diagonalizes the exponential ring below and above `V = 1` and compares
//! the eigenvalues with the closed-form band and loop.
//!
//! ```text
//! cargo run --example real_and_loop_spectra
//! ```

use nhlab::analytic::analytic_spectrum_exp;
use nhlab::diagnostics::{real_fraction, REAL_TOLERANCE};
use nhlab::eigensolver::eigenvalues;
use nhlab::{model, ModelSpec};

fn main() -> nhlab::Result<()> {
    for v in [0.5, 2.0] {
        // L = F_13 = 233 sites, alpha = 144/233.
        let spec = ModelSpec::exp(v, 13)?;
        let spectrum = eigenvalues(&model::build(&spec)?.densify())?;
        let curve = analytic_spectrum_exp(v, 4096)?;
        let off_curve = spectrum
            .values
            .iter()
            .map(|e| curve.distance_to(*e))
            .fold(0.0, f64::max);
        let max_abs_im = spectrum.values.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
        println!(
            "V = {v}: {} eigenvalues, real fraction {:.3}, max |Im E| {max_abs_im:.2e}, \
             farthest from the {} {off_curve:.2e}",
            spectrum.len(),
            real_fraction(&spectrum.values, REAL_TOLERANCE),
            curve.kind.as_str(),
        );
    }
    Ok(())
}
