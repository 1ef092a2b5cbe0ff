//! Roots of a seven-site chain over a strip of edge amplitudes, binned by their distance
//! from the single-site frequency `g ψ₀²`.

use nhse::solver::{fractal_scan, offset_histogram, Axis, BandTag, ScanGrid};
use nhse::{ModelParams, Precision};

pub fn run() -> nhse::Result<()> {
    let ctx = Precision::new(32)?;
    let model = ModelParams::dnls(1.0, 0.0)?;
    let grid = ScanGrid::real_window(0.0, 14.0)?.with_psi0(Axis::with_step(2.0, 3.5, 0.1)?);
    let roots = fractal_scan(&model, 6, &grid, &ctx)?;
    let continuum = roots.iter().filter(|r| r.band_tag == BandTag::Continuum).count();
    println!("{} roots, {continuum} inside the continuum", roots.len());
    for (offset, count) in offset_histogram(&roots, 1.0, 0.1).iter().take(5) {
        println!("  omega - g psi0^2 = {offset:+.1}: {count}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
