//! The tangent potential: where its eigenvalues fall and how the transfer
//! exponent compares with the conjectured closed form.

use nhlab::analytic::{distance_to_tan_set, gamma_tan_closed};
use nhlab::eigensolver::eigenvalues;
use nhlab::transfer::lyapunov_position;
use nhlab::{model, Complex64, ModelSpec};

fn main() -> nhlab::Result<()> {
    let v = 0.5;
    let spec = ModelSpec::tan(v, 13)?;
    let spectrum = eigenvalues(&model::build(&spec)?.densify())?;
    let near = spectrum.values.iter().filter(|e| distance_to_tan_set(**e, v) <= 5e-2).count();
    println!("{near} of {} eigenvalues within 0.05 of [V-2, 2-V] ∪ iR", spectrum.len());

    for e in [Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.5), Complex64::new(0.4, 1.0), Complex64::new(2.0, 0.2)] {
        let est = lyapunov_position(&spec, e, 200_000, 0.0)?;
        println!("E = {e}: transfer {:.5}, conjecture {:.5}", est.gamma, gamma_tan_closed(e, v));
    }
    Ok(())
}
