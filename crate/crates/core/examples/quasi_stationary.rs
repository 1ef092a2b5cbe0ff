use nhse::bands::quasi_stationary_residual;
use nhse::numerics::{leading_exponent, required_digits_estimate};
use nhse::{ComplexAmp, Precision};

pub fn run() -> nhse::Result<()> {
    let n = 100;
    let ctx = Precision::new(required_digits_estimate(n, 20))?;
    for w in [0.8, 0.5, 0.2, -0.5] {
        let omega = ComplexAmp::real_f64(w, &ctx);
        let r = quasi_stationary_residual(1.0, 0.0, 1.0, &omega, n, &ctx)?;
        let turned = quasi_stationary_residual(1.0, 0.0, 1.0, &omega.rotate(&ctx.float(1.0)), n, &ctx)?;
        println!(
            "omega = {w:+}: |psi_101| ~ 1e{}, rotated by 1 rad ~ 1e{}",
            leading_exponent(&r).unwrap_or(0),
            leading_exponent(&turned).unwrap_or(0)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
