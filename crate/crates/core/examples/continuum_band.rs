use nhse::bands::{default_probe_len, dnls_real_band, dnls_real_band_numeric, find_n_offset, verify_band_edge};
use nhse::{ComplexAmp, ModelParams, Precision};

pub fn run() -> nhse::Result<()> {
    let ctx = Precision::new(32)?;
    let band = dnls_real_band(1.0, 0.8, 0.0, None)?;
    println!("gamma = 0, psi0 = 0.8: ({:.4}, {:.4}]", band.lo, band.hi);

    for gamma in [0.05, 0.1] {
        let model = ModelParams::dnls(1.0, gamma)?;
        let band = dnls_real_band_numeric(&model, 1.0, &ctx)?;
        let (n, psin) = find_n_offset(&model, 1.0, band.lo + 0.05, &ctx)?;
        println!("gamma = {gamma}: ({:.4}, {:.4}], peak at site {n}, |psi_n| = {:.4}", band.lo, band.hi, psin.to_f64());
        for w in [band.lo - 0.01, band.lo + 0.01, band.hi - 0.01, band.hi + 0.01] {
            let v = verify_band_edge(&model, 1.0, &ComplexAmp::real_f64(w, &ctx), default_probe_len(&ctx), &ctx)?;
            println!("  omega = {w:+.4}: {:?} after {} sites", v.classification, v.sites_to_verdict);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
