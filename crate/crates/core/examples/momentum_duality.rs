//! Position/momentum duality: the dual ring's spectrum scaled by `V`, the
//! Fourier image of an eigenstate, and the momentum-space exponent.

use nhlab::analytic::{duality_relation_residual, gamma_momentum_closed};
use nhlab::diagnostics::{decay_rate_fit_forward, ipr, spectral_distance};
use nhlab::duality::{build_dual_exp, fourier_transform, lyapunov_momentum_product};
use nhlab::eigensolver::{eigenpair_near, eigenvalues};
use nhlab::transfer::lyapunov_position;
use nhlab::{model, Complex64, ModelSpec};

fn main() -> nhlab::Result<()> {
    let v = 0.5;
    let spec = ModelSpec::exp(v, 13)?;
    let h = model::build(&spec)?.densify();

    let position = eigenvalues(&h)?;
    let dual: Vec<Complex64> = eigenvalues(&build_dual_exp(&spec)?.densify())?
        .values
        .iter()
        .map(|e| e * v)
        .collect();
    println!("Hausdorff(position, V * dual) = {:.2e}", spectral_distance(&position.values, &dual)?);

    // An extended state in position space is localized in momentum space.
    let pair = eigenpair_near(&h, Complex64::new(0.7, 0.0))?;
    let phi = fourier_transform(&pair.vector, spec.p, spec.q)?;
    let fit = decay_rate_fit_forward(&phi.amplitudes)?;
    println!(
        "E = {:.4}: IPR {:.4} in position space, {:.4} in momentum space",
        pair.value.re,
        ipr(&pair.vector)?,
        ipr(&phi.amplitudes)?
    );
    println!(
        "momentum-space decay rate {:.3} (closed form {:.3})",
        fit.rate,
        gamma_momentum_closed(v)
    );

    let e = Complex64::new(1.1, 0.0);
    let g = lyapunov_position(&spec, e, 200_000, 0.0)?.gamma;
    let gm = lyapunov_momentum_product(&spec, e, 200_000)?.gamma;
    println!(
        "gamma = {g:.5}, gamma_m = {gm:.5}, |gamma - gamma_m - ln V| = {:.1e}",
        duality_relation_residual(g, gm, v).abs()
    );
    Ok(())
}
