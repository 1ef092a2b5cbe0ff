//! The finite AL chain at `γ = 0` has a single exact stationary frequency.

use nhse::bands::al_exceptional_check;
use nhse::numerics::required_digits_estimate;
use nhse::Precision;

pub fn run() -> nhse::Result<()> {
    for n in [10, 40] {
        let ctx = Precision::new(required_digits_estimate(n, 20))?;
        let roots = al_exceptional_check(n, 1.0, 1.0, (-2.0, 2.0), &ctx)?;
        for r in &roots {
            println!("N = {n}: omega = {} support {:?}", r.omega, r.support);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
