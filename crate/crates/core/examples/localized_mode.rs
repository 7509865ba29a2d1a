//! The isolated real eigenvalue `V + 1/V` at `theta = 0` and its localized
//! eigenstate.

use nhlab::diagnostics::{decay_rate_fit, ipr};
use nhlab::duality::fourier_transform;
use nhlab::eigensolver::eigenpair_near;
use nhlab::{model, Complex64, ModelSpec};

fn main() -> nhlab::Result<()> {
    let v = 3.0;
    let spec = ModelSpec::exp(v, 13)?.with_theta(0.0);
    let target = Complex64::new(v + 1.0 / v, 0.0);
    let pair = eigenpair_near(&model::build(&spec)?.densify(), target)?;
    let dual = fourier_transform(&pair.vector, spec.p, spec.q)?;
    let fit = decay_rate_fit(&pair.vector)?;
    println!("E0 = {:.6}{:+.1e}i (V + 1/V = {:.6})", pair.value.re, pair.value.im, target.re);
    println!("residual {:.1e}", pair.residual);
    println!("IPR {:.4}, dual IPR {:.5} (1/L = {:.5})", ipr(&pair.vector)?, ipr(&dual.amplitudes)?, 1.0 / spec.len as f64);
    println!("decay rate {:.3} over {} sites, ln V = {:.3}", fit.rate, fit.usable, v.ln());
    Ok(())
}
