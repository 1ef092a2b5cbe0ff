//! The two lattice models: nonreciprocal DNLS and the non-Hermitian Ablowitz–Ladik chain.
//!
//! Both are written as explicit left-to-right maps for a fixed frequency `ω`:
//!
//! ```text
//! DNLS: ψ_{j+1} = (ω − g|ψ_j|²) ψ_j − γ ψ_{j−1}
//! AL:   ψ_{j+1} = ω ψ_j / (1 + g|ψ_j|²) − γ ψ_{j−1}
//! ```

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexAmp, LatticeState, Precision, StepMap, Verdict, VANISH_RUN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "dnls")]
    Dnls,
    #[serde(rename = "al")]
    AblowitzLadik,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Dnls => "dnls",
            ModelKind::AblowitzLadik => "al",
        }
    }
}

/// Model choice with nonlinearity `g` and non-Hermitian degree `γ ∈ [0, 1)`.
///
/// `g = 0` is accepted as the linear limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub g: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(kind: ModelKind, g: f64, gamma: f64) -> Result<Self> {
        if !g.is_finite() || g < 0.0 {
            return Err(Error::config(format!("nonlinearity g must be finite and >= 0, got {g}")));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::config(format!("gamma must lie in [0, 1), got {gamma}")));
        }
        Ok(ModelParams { kind, g, gamma })
    }

    pub fn dnls(g: f64, gamma: f64) -> Result<Self> {
        ModelParams::new(ModelKind::Dnls, g, gamma)
    }

    pub fn al(g: f64, gamma: f64) -> Result<Self> {
        ModelParams::new(ModelKind::AblowitzLadik, g, gamma)
    }

    pub fn is_linear(&self) -> bool {
        self.g == 0.0
    }

    /// The same model with `|ψ|²` replaced by the chosen [`Nonlinearity`].
    pub fn with_branch(self, branch: Nonlinearity) -> BranchedModel {
        BranchedModel { params: self, branch }
    }
}

/// How the intensity `|ψ|²` enters the step map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    /// The physical intensity `ψ ψ̄`.
    #[default]
    Modulus,
    /// The analytic continuation `ψ²`, which agrees with `Modulus` on real amplitudes and
    /// makes the boundary value a polynomial in complex `ω`.
    Holomorphic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchedModel {
    pub params: ModelParams,
    pub branch: Nonlinearity,
}

/// `g·I(ψ)` as a complex number.
fn intensity(curr: &ComplexAmp, g: f64, branch: Nonlinearity) -> (Float, Float) {
    let p = curr.prec();
    match branch {
        Nonlinearity::Modulus => {
            let mut n = curr.norm_sqr();
            n *= g;
            (n, Float::new(p))
        }
        Nonlinearity::Holomorphic => {
            let mut re = Float::with_val(p, curr.re().square_ref());
            re -= Float::with_val(p, curr.im().square_ref());
            re *= g;
            let mut im = Float::with_val(p, curr.re() * curr.im());
            im *= 2.0 * g;
            (re, im)
        }
    }
}

fn minus_gamma_prev(next: ComplexAmp, prev: &ComplexAmp, gamma: f64) -> ComplexAmp {
    if gamma == 0.0 {
        return next;
    }
    &next - &prev.scale_f64(gamma)
}

fn dnls_next(
    prev: &ComplexAmp,
    curr: &ComplexAmp,
    omega: &ComplexAmp,
    params: &ModelParams,
    branch: Nonlinearity,
) -> ComplexAmp {
    let p = curr.prec();
    let (ir, ii) = intensity(curr, params.g, branch);
    let factor = ComplexAmp::new(Float::with_val(p, omega.re() - &ir), Float::with_val(p, omega.im() - &ii));
    minus_gamma_prev(&factor * curr, prev, params.gamma)
}

fn al_next(
    prev: &ComplexAmp,
    curr: &ComplexAmp,
    omega: &ComplexAmp,
    params: &ModelParams,
    branch: Nonlinearity,
) -> ComplexAmp {
    let p = curr.prec();
    let (mut ir, ii) = intensity(curr, params.g, branch);
    ir += 1;
    let num = omega * curr;
    let ratio = if ii.is_zero() {
        ComplexAmp::new(Float::with_val(p, num.re() / &ir), Float::with_val(p, num.im() / &ir))
    } else {
        num.div(&ComplexAmp::new(ir, ii))
    };
    minus_gamma_prev(ratio, prev, params.gamma)
}

/// `ψ_{j+1} = (ω − g|ψ_j|²)ψ_j − γψ_{j−1}`.
pub fn dnls_step(
    prev: &ComplexAmp,
    curr: &ComplexAmp,
    omega: &ComplexAmp,
    params: &ModelParams,
) -> ComplexAmp {
    dnls_next(prev, curr, omega, params, Nonlinearity::Modulus)
}

/// `ψ_{j+1} = ωψ_j / (1 + g|ψ_j|²) − γψ_{j−1}`. The denominator is at least 1 for `g ≥ 0`.
pub fn al_step(
    prev: &ComplexAmp,
    curr: &ComplexAmp,
    omega: &ComplexAmp,
    params: &ModelParams,
) -> ComplexAmp {
    al_next(prev, curr, omega, params, Nonlinearity::Modulus)
}

fn step_real_impl(params: &ModelParams, prev: &Float, curr: &Float, omega: &Float) -> Float {
    let p = curr.prec();
    let mut i = Float::with_val(p, curr.square_ref());
    i *= params.g;
    let mut next = match params.kind {
        ModelKind::Dnls => {
            let mut f = Float::with_val(p, omega - &i);
            f *= curr;
            f
        }
        ModelKind::AblowitzLadik => {
            i += 1;
            let mut f = Float::with_val(p, omega * curr);
            f /= &i;
            f
        }
    };
    if params.gamma != 0.0 {
        next -= Float::with_val(p, prev * params.gamma);
    }
    next
}

impl StepMap for ModelParams {
    fn step(&self, prev: &ComplexAmp, curr: &ComplexAmp, omega: &ComplexAmp) -> ComplexAmp {
        match self.kind {
            ModelKind::Dnls => dnls_next(prev, curr, omega, self, Nonlinearity::Modulus),
            ModelKind::AblowitzLadik => al_next(prev, curr, omega, self, Nonlinearity::Modulus),
        }
    }

    fn step_real(&self, prev: &Float, curr: &Float, omega: &Float) -> Float {
        step_real_impl(self, prev, curr, omega)
    }
}

impl StepMap for BranchedModel {
    fn step(&self, prev: &ComplexAmp, curr: &ComplexAmp, omega: &ComplexAmp) -> ComplexAmp {
        match self.params.kind {
            ModelKind::Dnls => dnls_next(prev, curr, omega, &self.params, self.branch),
            ModelKind::AblowitzLadik => al_next(prev, curr, omega, &self.params, self.branch),
        }
    }

    fn step_real(&self, prev: &Float, curr: &Float, omega: &Float) -> Float {
        step_real_impl(&self.params, prev, curr, omega)
    }
}

fn require_kind(params: &ModelParams, kind: ModelKind, op: &str) -> Result<()> {
    if params.kind != kind {
        return Err(Error::config(format!("{op} requires the {} model", kind.name())));
    }
    Ok(())
}

/// `e^{ik} + γe^{−ik}` at working precision.
fn hopping_symbol(k: &Float, gamma: f64, ctx: &Precision) -> ComplexAmp {
    let (s, c) = Float::with_val(ctx.bits(), k).sin_cos(ctx.zero());
    let mut re = Float::with_val(ctx.bits(), &c * gamma);
    re += &c;
    let mut im = Float::with_val(ctx.bits(), &s * gamma);
    im = Float::with_val(ctx.bits(), &s - &im);
    ComplexAmp::new(re, im)
}

/// Plane-wave frequency `ω_k = e^{ik} + γe^{−ik} + g|ψ₀|²` of the periodic DNLS ring.
pub fn dnls_pbc_dispersion(
    k: &Float,
    psi0_mag: f64,
    params: &ModelParams,
    ctx: &Precision,
) -> Result<ComplexAmp> {
    require_kind(params, ModelKind::Dnls, "dnls_pbc_dispersion")?;
    let h = hopping_symbol(k, params.gamma, ctx);
    let mut shift = ctx.float(psi0_mag);
    shift.square_mut();
    shift *= params.g;
    let re = Float::with_val(ctx.bits(), h.re() + &shift);
    Ok(ComplexAmp::new(re, h.im().clone()))
}

/// Plane-wave frequency `ω_k = (1 + g|ψ₀|²)(e^{ik} + γe^{−ik})` of the periodic AL ring.
///
/// The second exponential carries `−ik`, which is what the `γψ_{j−1}` hopping produces.
pub fn al_pbc_dispersion(
    k: &Float,
    psi0_mag: f64,
    params: &ModelParams,
    ctx: &Precision,
) -> Result<ComplexAmp> {
    require_kind(params, ModelKind::AblowitzLadik, "al_pbc_dispersion")?;
    let h = hopping_symbol(k, params.gamma, ctx);
    let mut scale = ctx.float(psi0_mag);
    scale.square_mut();
    scale *= params.g;
    scale += 1;
    Ok(h.scale(&scale))
}

/// Which closed-form family a solution belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormulaId {
    /// `ψ_j = ψ₀δ_{j,0}`, `ω₀ = g|ψ₀|²`.
    SingleSite,
    /// Two occupied sites on the lower root `ω₋`.
    TwoSiteMinus,
    /// Two occupied sites on the upper root `ω₊`.
    TwoSitePlus,
}

#[derive(Clone, Debug)]
pub struct ClosedFormSolution {
    pub support: usize,
    pub omega: ComplexAmp,
    pub amps: LatticeState,
    pub formula: FormulaId,
}

/// `(ω₋, ω₊)` for the two-site family, computed without cancellation in `ω₋`.
pub fn two_site_frequencies(psi0_mag: f64, g: f64, ctx: &Precision) -> (Float, Float) {
    let bits = ctx.bits();
    let mut a = ctx.float(psi0_mag);
    a.square_mut();
    a *= g;
    // s = sqrt(1 + 4a²)
    let mut s = Float::with_val(bits, a.square_ref());
    s *= 4;
    s += 1;
    s.sqrt_mut();
    let two_a = Float::with_val(bits, &a * 2u32);
    // (1 - s)/(2a) = -2a/(1 + s)
    let mut minus = Float::with_val(bits, &s + 1u32);
    minus = Float::with_val(bits, &two_a / &minus);
    let omega_minus = Float::with_val(bits, &a - &minus);
    let mut plus = Float::with_val(bits, &s + 1u32);
    plus /= &two_a;
    let omega_plus = Float::with_val(bits, &a + &plus);
    (omega_minus, omega_plus)
}

/// The three exact OBC solutions of the fully nonreciprocal DNLS chain supported on at
/// most two sites: `ω₀`, `ω₋`, `ω₊`, in that order.
pub fn closed_form_solutions(
    psi0_mag: f64,
    params: &ModelParams,
    ctx: &Precision,
) -> Result<Vec<ClosedFormSolution>> {
    require_kind(params, ModelKind::Dnls, "closed_form_solutions")?;
    if params.gamma != 0.0 {
        return Err(Error::config("closed forms exist only at gamma = 0"));
    }
    if !(psi0_mag > 0.0) || !psi0_mag.is_finite() {
        return Err(Error::DegenerateInput(format!("closed forms need |psi0| > 0, got {psi0_mag}")));
    }
    if params.g == 0.0 {
        return Err(Error::DegenerateInput("closed forms need g > 0".into()));
    }
    let psi0 = ctx.float(psi0_mag);
    let mut a = Float::with_val(ctx.bits(), psi0.square_ref());
    a *= params.g;

    let build = |lead: Vec<ComplexAmp>| {
        let support = lead.len();
        let mut amps = lead;
        amps.extend(std::iter::repeat_with(|| ComplexAmp::zero(ctx)).take(VANISH_RUN));
        (support, LatticeState::from_parts(amps, Verdict::Vanished(support)))
    };

    let mut out = Vec::with_capacity(3);
    let (support, amps) = build(vec![ComplexAmp::real(psi0.clone())]);
    out.push(ClosedFormSolution {
        support,
        omega: ComplexAmp::real(a.clone()),
        amps,
        formula: FormulaId::SingleSite,
    });

    let (omega_minus, omega_plus) = two_site_frequencies(psi0_mag, params.g, ctx);
    for (omega, formula) in [(omega_minus, FormulaId::TwoSiteMinus), (omega_plus, FormulaId::TwoSitePlus)] {
        let mut psi1 = Float::with_val(ctx.bits(), &omega - &a);
        psi1 *= &psi0;
        let (support, amps) = build(vec![ComplexAmp::real(psi0.clone()), ComplexAmp::real(psi1)]);
        out.push(ClosedFormSolution { support, omega: ComplexAmp::real(omega), amps, formula });
    }
    Ok(out)
}
