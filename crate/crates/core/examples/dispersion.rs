//! Plane-wave dispersion of the periodic chains. With `γ < 1` the curve encloses an
//! area in the complex plane.

use nhse::models::{al_pbc_dispersion, dnls_pbc_dispersion};
use nhse::{ModelParams, Precision};

pub fn run() -> nhse::Result<()> {
    let ctx = Precision::new(30)?;
    let dnls = ModelParams::dnls(1.0, 0.3)?;
    let al = ModelParams::al(1.0, 0.3)?;
    println!("{:>6} {:>22} {:>22}", "k", "dnls", "al");
    for i in 0..=8 {
        let k = ctx.float(std::f64::consts::PI * i as f64 / 4.0);
        let a = dnls_pbc_dispersion(&k, 0.5, &dnls, &ctx)?.to_f64_pair();
        let b = al_pbc_dispersion(&k, 0.5, &al, &ctx)?.to_f64_pair();
        println!("{:6.3} {:>10.4} {:+10.4}i {:>10.4} {:+10.4}i", k.to_f64(), a.0, a.1, b.0, b.1);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
