//! Position-space Lyapunov exponents from transfer-matrix products, against
//! the closed form `max(0, ln V)`, plus a complexified-phase run.

use nhlab::analytic::{gamma_position_closed, loop_point};
use nhlab::transfer::{lyapunov_position, lyapunov_position_with, PositionOptions};
use nhlab::{Complex64, ModelSpec};

fn main() -> nhlab::Result<()> {
    let n = 200_000;
    for v in [0.5, 2.0] {
        let spec = ModelSpec::exp(v, 13)?;
        let closed = gamma_position_closed(v);
        for k in [0.4, 1.7, 3.0] {
            let e = if v < 1.0 { Complex64::new(2.0 * f64::cos(k), 0.0) } else { loop_point(v, k) };
            let est = lyapunov_position(&spec, e, n, 0.0)?;
            println!(
                "V = {v}  E = {:>7.4}{:+.4}i  gamma = {:.5} ± {:.1e}  closed form {closed:.5}",
                e.re, e.im, est.gamma, est.stderr
            );
        }
    }

    // Pushing the phase into the upper half plane adds vartheta to gamma.
    let spec = ModelSpec::exp(2.0, 13)?;
    let opts = PositionOptions { n, ..PositionOptions::default() };
    let est = lyapunov_position_with(&spec, loop_point(2.0, 1.0), 2.0, &opts)?;
    println!("vartheta = 2: gamma = {:.5}, expected {:.5}", est.gamma, 2.0 + 2f64.ln());
    Ok(())
}
