//! Spatial stability of stationary solutions.
//!
//! A small kick `δ` is added at one site and the full nonlinear recurrence is rerun from
//! there. The per-step growth of the difference to the unperturbed profile decides whether
//! the solution survives on a longer chain.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelParams;
use crate::numerics::{extend_sites, max_abs, ComplexAmp, LatticeState, Precision, StepMap, Verdict};
use crate::solver::{SolutionRecord, StabilityTag};

/// Half-width of the band around unit growth reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    /// Trailing growth within [`MARGINAL_BAND`] of 1.
    StableMarginal,
    Unstable,
}

impl Stability {
    pub fn tag(self) -> StabilityTag {
        match self {
            Stability::Unstable => StabilityTag::Unstable,
            _ => StabilityTag::Stable,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PerturbationTrace {
    pub base: SolutionRecord,
    pub site: usize,
    pub delta_mag: Float,
    /// `δψ_j` for `j = site, site+1, …` until the trace stops.
    pub differences: Vec<ComplexAmp>,
    /// `|δψ_{j+1}| / |δψ_j|`.
    pub ratios: Vec<f64>,
    /// Geometric mean of the trailing half of `ratios`; 1 when there are none.
    pub growth: f64,
    pub classification: Stability,
    /// The perturbed run crossed the divergence ceiling.
    pub diverged: bool,
}

/// Perturbs `ψ_site` by `δ` and follows the difference for up to `steps` sites.
///
/// `delta_mag = None` uses `10^(−digits/3)·max_j |ψ_j|`. Recording stops early once the
/// difference sinks to the roundoff floor.
pub fn perturb_growth(
    model: &ModelParams,
    solution: &SolutionRecord,
    base: &LatticeState,
    site: usize,
    delta_mag: Option<f64>,
    steps: usize,
    ctx: &Precision,
) -> Result<PerturbationTrace> {
    if steps < 10 {
        return Err(Error::config(format!("stability trace needs at least 10 steps, got {steps}")));
    }
    let support = solution.support.unwrap_or(base.len());
    if site >= support || site >= base.len() {
        return Err(Error::config(format!("site {site} lies outside the support {support}")));
    }
    let bits = ctx.bits();
    let scale = max_abs(base.amps());
    let delta = match delta_mag {
        Some(d) => ctx.float(d),
        None => Float::with_val(bits, &scale * ctx.pow10(-f64::from(ctx.digits()) / 3.0)),
    };
    if delta < 0 || !delta.is_finite() {
        return Err(Error::config("perturbation magnitude must be finite and >= 0"));
    }
    if delta >= Float::with_val(bits, &scale * 1e-6) {
        return Err(Error::config("perturbation must stay below 1e-6 of the peak amplitude"));
    }

    let last = site + steps;
    let omega = solution.omega.at(ctx);
    let mut reference: Vec<ComplexAmp> = base.amps().iter().map(|a| a.at(ctx)).collect();
    match base.verdict() {
        Verdict::Vanished(_) => reference.resize(last + 1, ComplexAmp::zero(ctx)),
        _ => extend_sites(model, &ComplexAmp::zero(ctx), &mut reference, &omega, last)?,
    }

    let before = if site == 0 { ComplexAmp::zero(ctx) } else { reference[site - 1].clone() };
    let kicked = &reference[site] + &ComplexAmp::real(delta.clone());
    let floor = Float::with_val(bits, &scale * ctx.pow10(4.0 - f64::from(ctx.digits())));
    let ceiling = ctx.diverge_threshold();

    let mut differences = vec![ComplexAmp::real(delta.clone())];
    let mut prev = before;
    let mut curr = kicked;
    let mut diverged = false;
    if !delta.is_zero() {
        for target in &reference[site + 1..=last] {
            let next = model.step(&prev, &curr, &omega);
            if !next.is_finite() || next.abs() > *ceiling {
                diverged = true;
                break;
            }
            let d = &next - target;
            let small = d.abs() < floor;
            differences.push(d);
            if small {
                break;
            }
            prev = std::mem::replace(&mut curr, next);
        }
    }

    let ratios: Vec<f64> = differences
        .windows(2)
        .map(|w| Float::with_val(bits, w[1].abs() / w[0].abs()).to_f64())
        .collect();
    let tail = &ratios[ratios.len() / 2..];
    let growth = if tail.is_empty() {
        1.0
    } else {
        (tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp()
    };
    let classification = if ratios.is_empty() {
        Stability::Stable
    } else if diverged || growth > 1.0 + MARGINAL_BAND {
        Stability::Unstable
    } else if growth >= 1.0 - MARGINAL_BAND {
        Stability::StableMarginal
    } else {
        Stability::Stable
    };
    let mut base_record = solution.clone();
    base_record.stability_tag = classification.tag();
    Ok(PerturbationTrace {
        base: base_record,
        site,
        delta_mag: delta,
        differences,
        ratios,
        growth,
        classification,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{closed_form_solutions, FormulaId};
    use crate::solver::BandTag;

    fn two_site(psi0: f64, which: FormulaId, c: &Precision) -> (ModelParams, SolutionRecord, LatticeState) {
        let m = ModelParams::dnls(1.0, 0.0).unwrap();
        let sol = closed_form_solutions(psi0, &m, c).unwrap().into_iter().find(|s| s.formula == which).unwrap();
        let rec = SolutionRecord {
            omega: sol.omega.clone(),
            psi0_mag: psi0,
            support: Some(sol.support),
            residual: c.zero(),
            band_tag: BandTag::Discrete,
            stability_tag: StabilityTag::Untested,
        };
        (m, rec, sol.amps)
    }

    #[test]
    fn plus_branch_is_unstable() {
        let c = Precision::new(40).unwrap();
        let (m, rec, amps) = two_site(1.0, FormulaId::TwoSitePlus, &c);
        let t = perturb_growth(&m, &rec, &amps, 1, None, 20, &c).unwrap();
        assert_eq!(t.classification, Stability::Unstable);
        let w = rec.omega.re().to_f64();
        assert!((t.growth / w - 1.0).abs() < 0.01, "{} vs {w}", t.growth);
        assert_eq!(t.base.stability_tag, StabilityTag::Unstable);
    }

    #[test]
    fn minus_branch_is_stable() {
        let c = Precision::new(40).unwrap();
        let (m, rec, amps) = two_site(1.0, FormulaId::TwoSiteMinus, &c);
        let t = perturb_growth(&m, &rec, &amps, 1, None, 40, &c).unwrap();
        assert_eq!(t.classification, Stability::Stable);
        let w = rec.omega.re().to_f64();
        assert!((t.growth / w - 1.0).abs() < 0.01, "{} vs {w}", t.growth);
    }

    #[test]
    fn leading_order_difference() {
        // δψ₂ ≈ −2gψ₁² δψ₁
        let c = Precision::new(40).unwrap();
        let (m, rec, amps) = two_site(1.0, FormulaId::TwoSitePlus, &c);
        let t = perturb_growth(&m, &rec, &amps, 1, Some(1e-12), 12, &c).unwrap();
        let psi1 = amps.amps()[1].re().to_f64();
        let predicted = -2.0 * psi1 * psi1 * 1e-12;
        let d2 = t.differences[1].re().to_f64();
        assert!((d2 - predicted).abs() < 10.0 * 1e-24);
    }

    #[test]
    fn zero_kick_is_stable() {
        let c = Precision::new(40).unwrap();
        let (m, rec, amps) = two_site(1.0, FormulaId::TwoSitePlus, &c);
        let t = perturb_growth(&m, &rec, &amps, 1, Some(0.0), 12, &c).unwrap();
        assert!(t.ratios.is_empty());
        assert_eq!(t.classification, Stability::Stable);
    }

    #[test]
    fn guards() {
        let c = Precision::new(40).unwrap();
        let (m, rec, amps) = two_site(1.0, FormulaId::TwoSitePlus, &c);
        assert!(perturb_growth(&m, &rec, &amps, 1, None, 5, &c).is_err());
        assert!(perturb_growth(&m, &rec, &amps, 2, None, 12, &c).is_err());
        assert!(perturb_growth(&m, &rec, &amps, 1, Some(1e-3), 12, &c).is_err());
    }
}
