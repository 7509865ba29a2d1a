//! Fraction of real eigenvalues of disordered Hatano–Nelson rings as the
//! gauge field grows.

use nhlab::diagnostics::hatano_regime_scan;
use nhlab::ModelSpec;

fn main() -> nhlab::Result<()> {
    let base = ModelSpec::hatano_nelson(89, 0.0, 7)?;
    let h_grid: Vec<f64> = (0..=10).map(|j| 0.1 * j as f64).collect();
    let report = hatano_regime_scan(&base, &h_grid, 8)?;
    for (h, row) in report.h_grid.iter().zip(&report.real_fraction) {
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        println!("h = {h:.1}: mean real fraction {mean:.3}");
    }
    println!("{}", report.summary_json());
    Ok(())
}
