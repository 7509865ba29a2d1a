//! The Dini integral in closed form and by quadrature, and the Thouless
//! formula over a numerical spectrum.

use nhlab::analytic::{dini_integral, dini_quadrature, loop_point, thouless_gamma};
use nhlab::eigensolver::eigenvalues;
use nhlab::{model, Complex64, ModelSpec};

fn main() -> nhlab::Result<()> {
    for e in [Complex64::new(0.3, 0.0), Complex64::new(2.5, 0.0), Complex64::new(1.0, 1.0)] {
        println!(
            "E = {e}: closed form {:.8}, quadrature {:.8}",
            dini_integral(e),
            dini_quadrature(e, 1_000_000)?
        );
    }

    let v = 2.0;
    let spec = ModelSpec::exp(v, 14)?;
    let spectrum = eigenvalues(&model::build(&spec)?.densify())?;
    // Probes inside and on the loop; outside it gamma follows the free Dini value.
    for e in [Complex64::new(0.0, 0.0), Complex64::new(0.4, 0.3), loop_point(v, 1.0 + 0.5 / 377.0)] {
        println!(
            "Thouless gamma at {:.3}{:+.3}i = {:.5} (ln V = {:.5})",
            e.re,
            e.im,
            thouless_gamma(&spectrum.values, e)?,
            v.ln()
        );
    }
    Ok(())
}
