//! Scans gamma against the complexified phase and extracts the integer
//! slopes of the piecewise-linear fit.

use nhlab::transfer::avila_scan;
use nhlab::{Complex64, ModelSpec};

fn main() -> nhlab::Result<()> {
    let grid: Vec<f64> = (0..=30).map(|j| 0.1 * j as f64).collect();
    for v in [0.5, 2.0] {
        let spec = ModelSpec::exp(v, 13)?;
        let scan = avila_scan(&spec, Complex64::new(1.0, 0.0), &grid, 100_000)?;
        println!(
            "V = {v}: slopes {:?}, breakpoints {:?}, fit residual {:.1e}, monotone {}, convex {}",
            scan.slopes(),
            scan.breakpoints.iter().map(|b| format!("{b:.4}")).collect::<Vec<_>>(),
            scan.residual,
            scan.is_monotone(),
            scan.is_convex(),
        );
    }
    println!("expected breakpoint for V = 0.5: ln 2 = {:.4}", 2f64.ln());
    Ok(())
}
