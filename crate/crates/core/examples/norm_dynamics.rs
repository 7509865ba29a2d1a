//! Norm of a site-localized state under `exp(-iHt)`: conserved for a real
//! spectrum, growing at `max Im E` otherwise. A real but strongly non-normal
//! spectrum still allows polynomial transient growth, so the fitted exponent
//! approaches 0 only like `1/t`.

use nhlab::diagnostics::{evolve_norm, time_grid};
use nhlab::{model, Complex64, ModelSpec};

fn main() -> nhlab::Result<()> {
    for v in [0.5, 2.0] {
        let h = model::build(&ModelSpec::exp(v, 11)?)?;
        let mut psi0 = vec![Complex64::new(0.0, 0.0); h.len()];
        psi0[0] = Complex64::new(1.0, 0.0);
        let evo = evolve_norm(&h, &psi0, &time_grid(200.0, 400))?;
        println!(
            "V = {v}: growth exponent {:.4}, max Im E {:.4}, basis condition {:.1e}, ln|psi(200)| = {:.3}",
            evo.growth_exponent,
            evo.max_imag,
            evo.basis_condition,
            evo.log_norms.last().copied().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
