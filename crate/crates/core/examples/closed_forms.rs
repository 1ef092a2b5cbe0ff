//! The three solutions living on at most two sites, and the shooting solver finding them
//! among the longer-support roots.

use nhse::models::closed_form_solutions;
use nhse::solver::{find_stationary_obc, ScanGrid};
use nhse::{ModelParams, Precision};

pub fn run() -> nhse::Result<()> {
    let ctx = Precision::new(30)?;
    let model = ModelParams::dnls(1.0, 0.0)?;
    for psi0 in [0.5, 1.0, 2.0] {
        println!("psi0 = {psi0}");
        for sol in closed_form_solutions(psi0, &model, &ctx)? {
            println!("  {:?}: omega = {:.12}", sol.formula, sol.omega.re().to_f64());
        }
        let roots = find_stationary_obc(&model, psi0, 5, &ScanGrid::real_window(-1.0, 6.0)?, &ctx)?;
        let short: Vec<String> = roots
            .iter()
            .filter(|r| r.support.is_some_and(|s| s <= 2))
            .map(|r| format!("{:.12}", r.omega_f64().0))
            .collect();
        println!("  solver, N = 5: {} roots, support <= 2 at {}", roots.len(), short.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
