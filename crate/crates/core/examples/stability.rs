use nhse::models::closed_form_solutions;
use nhse::solver::{BandTag, SolutionRecord, StabilityTag};
use nhse::stability::perturb_growth;
use nhse::{ModelParams, Precision};

pub fn run() -> nhse::Result<()> {
    let ctx = Precision::new(50)?;
    let model = ModelParams::dnls(1.0, 0.0)?;
    for psi0 in [0.5, 1.0, 2.0] {
        for sol in closed_form_solutions(psi0, &model, &ctx)?.into_iter().filter(|s| s.support == 2) {
            let rec = SolutionRecord {
                omega: sol.omega.clone(),
                psi0_mag: psi0,
                support: Some(2),
                residual: ctx.zero(),
                band_tag: BandTag::Discrete,
                stability_tag: StabilityTag::Untested,
            };
            let trace = perturb_growth(&model, &rec, &sol.amps, 1, None, 20, &ctx)?;
            println!(
                "psi0 = {psi0}, {:?} (omega = {:.4}): growth {:.4}, {:?}",
                sol.formula,
                sol.omega.re().to_f64(),
                trace.growth,
                trace.classification
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
