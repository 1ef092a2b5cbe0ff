//! Iterates the fully nonreciprocal DNLS chain at the `ω₊` frequency of `ψ₀ = 2` with
//! too few digits. The exact solution stops after two sites; roundoff does not.

use nhse::bands::divergence_profile;
use nhse::numerics::run_recurrence;
use nhse::{ComplexAmp, ModelParams, Precision};
use rug::Float;

pub fn run() -> nhse::Result<()> {
    let model = ModelParams::dnls(1.0, 0.0)?;
    for digits in [21, 80] {
        let ctx = Precision::new(digits)?;
        let mut w = Float::with_val(ctx.bits(), 65);
        w.sqrt_mut();
        w += 1;
        w /= 8;
        w += 4;
        let omega = ComplexAmp::real(w);
        let state = run_recurrence(&model, &ComplexAmp::real_f64(2.0, &ctx), &omega, 40, &ctx)?;
        println!("{digits} digits: {:?}", state.verdict());
        let profile = divergence_profile(&model, 2.0, &omega, 40, &ctx)?;
        for (j, l) in profile.log10_mags.iter().enumerate().step_by(5) {
            println!("  log10|psi_{j}| = {l:.2}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
