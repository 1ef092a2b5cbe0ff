//! Strong nonreciprocity opens a gap inside the continuum.

use nhse::bands::find_gap;
use nhse::Precision;

pub fn run() -> nhse::Result<()> {
    let ctx = Precision::new(32)?;
    for gamma in [0.0, 0.8] {
        let report = find_gap(1.0, 1.0, gamma, (0.0, 1.8), 0.002, &ctx)?;
        println!("gamma = {gamma}: {} gap(s)", report.gaps.len());
        for g in &report.gaps {
            println!("  ({:.3}, {:.3})", g.lo, g.hi);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
