//! Working-precision arithmetic and the recurrence engine shared by both lattice models.
//!
//! Every amplitude lives in a [`ComplexAmp`] whose components are MPFR floats at the
//! precision of a [`Precision`] context. The engine walks a [`StepMap`] left to right from
//! the open left edge (`ψ₋₁ = 0`) and classifies how the sequence terminates.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest supported working precision, in decimal digits.
pub const MIN_DIGITS: u32 = 16;

/// Consecutive sub-threshold sites required before a run is declared vanished.
pub const VANISH_RUN: usize = 5;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Decimal working precision plus the magnitude thresholds used to classify runs.
#[derive(Clone, Debug)]
pub struct Precision {
    digits: u32,
    bits: u32,
    diverge_threshold: Float,
    vanish_threshold: Float,
}

impl Precision {
    /// Context with `diverge = 10^(digits/2)` and `vanish = 10^(-digits/2)`.
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::config(format!(
                "working precision must be at least {MIN_DIGITS} digits, got {digits}"
            )));
        }
        let bits = (f64::from(digits) * LOG2_10).ceil() as u32;
        let half = f64::from(digits) / 2.0;
        Ok(Precision {
            digits,
            bits,
            diverge_threshold: pow10_at(bits, half),
            vanish_threshold: pow10_at(bits, -half),
        })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Mantissa bits backing `digits` decimal digits.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn diverge_threshold(&self) -> &Float {
        &self.diverge_threshold
    }

    pub fn vanish_threshold(&self) -> &Float {
        &self.vanish_threshold
    }

    /// Replaces the divergence ceiling with `10^exponent`.
    pub fn with_diverge_exponent(self, exponent: f64) -> Result<Self> {
        let t = pow10_at(self.bits, exponent);
        self.with_diverge_threshold(t)
    }

    /// Replaces the vanishing floor with `10^exponent`.
    pub fn with_vanish_exponent(self, exponent: f64) -> Result<Self> {
        let t = pow10_at(self.bits, exponent);
        self.with_vanish_threshold(t)
    }

    pub fn with_diverge_threshold(mut self, threshold: Float) -> Result<Self> {
        self.diverge_threshold = Float::with_val(self.bits, threshold);
        self.validate()?;
        Ok(self)
    }

    pub fn with_vanish_threshold(mut self, threshold: Float) -> Result<Self> {
        self.vanish_threshold = Float::with_val(self.bits, threshold);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.diverge_threshold > 1) {
            return Err(Error::config("diverge threshold must exceed 1"));
        }
        if !(self.vanish_threshold < 1 && self.vanish_threshold > 0) {
            return Err(Error::config("vanish threshold must lie in (0, 1)"));
        }
        // classification has to sit above the roundoff floor
        let floor = self.pow10(4.0 - f64::from(self.digits));
        if self.vanish_threshold < floor {
            return Err(Error::config(format!(
                "vanish threshold is below the roundoff floor 1e{}",
                4 - self.digits as i64
            )));
        }
        Ok(())
    }

    /// Same thresholds policy at twice the digits.
    pub fn doubled(&self) -> Self {
        Precision::new(self.digits * 2).expect("doubling a valid precision stays valid")
    }

    pub fn float(&self, x: f64) -> Float {
        Float::with_val(self.bits, x)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.bits)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits, Constant::Pi)
    }

    /// `10^exponent` at working precision.
    pub fn pow10(&self, exponent: f64) -> Float {
        pow10_at(self.bits, exponent)
    }

    /// Root-acceptance tolerance, `10^(-digits/2)`.
    pub fn tolerance(&self) -> Float {
        self.pow10(-f64::from(self.digits) / 2.0)
    }

    /// Duplicate-root merge distance, `10^(-digits/4)`.
    pub fn merge_tolerance(&self) -> Float {
        self.pow10(-f64::from(self.digits) / 4.0)
    }

    /// Residual bound for exact closed-form solutions, `10^(-digits+6)`.
    pub fn exact_tolerance(&self) -> Float {
        self.pow10(6.0 - f64::from(self.digits))
    }
}

fn pow10_at(bits: u32, exponent: f64) -> Float {
    Float::with_val(bits, exponent).exp10()
}

pub fn make_precision_context(digits: u32) -> Result<Precision> {
    Precision::new(digits)
}

/// Digits at which in-band recurrences of length `n` classify stably.
///
/// Chaotic amplification eats O(n) digits, hence `max(30, 2n + safety)`.
pub fn required_digits_estimate(n: usize, safety: u32) -> u32 {
    let linear = 2 * n as u64 + u64::from(safety);
    linear.max(30).min(u64::from(u32::MAX)) as u32
}

/// Floor of `log10 |x|`; `None` for zero.
pub fn leading_exponent(x: &Float) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let l = Float::with_val(x.prec().max(64), x.abs_ref()).log10();
    Some(l.floor().to_f64() as i64)
}

/// `log10 |x|` as an `f64` (finite even when `|x|` underflows an `f64`).
pub fn log10_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    Float::with_val(x.prec().max(64), x.abs_ref()).log10().to_f64()
}

/// Complex field amplitude with MPFR components.
#[derive(Clone, PartialEq)]
pub struct ComplexAmp {
    re: Float,
    im: Float,
}

impl ComplexAmp {
    pub fn new(re: Float, im: Float) -> Self {
        ComplexAmp { re, im }
    }

    pub fn zero(ctx: &Precision) -> Self {
        ComplexAmp::new(ctx.zero(), ctx.zero())
    }

    pub fn real(re: Float) -> Self {
        let im = Float::new(re.prec());
        ComplexAmp { re, im }
    }

    pub fn from_f64(re: f64, im: f64, ctx: &Precision) -> Self {
        ComplexAmp::new(ctx.float(re), ctx.float(im))
    }

    pub fn real_f64(re: f64, ctx: &Precision) -> Self {
        ComplexAmp::from_f64(re, 0.0, ctx)
    }

    /// `magnitude · e^{iθ}`.
    pub fn from_polar(magnitude: &Float, theta: &Float) -> Self {
        let p = magnitude.prec();
        let (s, c) = Float::with_val(p, theta).sin_cos(Float::new(p));
        ComplexAmp::new(Float::with_val(p, magnitude * &c), Float::with_val(p, magnitude * &s))
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    /// Re-rounds both components to `ctx`.
    pub fn at(&self, ctx: &Precision) -> Self {
        ComplexAmp::new(
            Float::with_val(ctx.bits(), &self.re),
            Float::with_val(ctx.bits(), &self.im),
        )
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// `|z|²`.
    pub fn norm_sqr(&self) -> Float {
        let mut n = Float::with_val(self.prec(), self.re.square_ref());
        n += Float::with_val(self.prec(), self.im.square_ref());
        n
    }

    /// `|z|`, computed with `hypot` so it cannot overflow before `|z|` does.
    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn conj(&self) -> Self {
        ComplexAmp::new(self.re.clone(), Float::with_val(self.prec(), -&self.im))
    }

    pub fn scale(&self, k: &Float) -> Self {
        let p = self.prec();
        ComplexAmp::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    pub fn scale_f64(&self, k: f64) -> Self {
        let p = self.prec();
        ComplexAmp::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    /// `z · e^{iθ}`.
    pub fn rotate(&self, theta: &Float) -> Self {
        let p = self.prec();
        let unit = ComplexAmp::from_polar(&Float::with_val(p, 1), theta);
        self * &unit
    }

    pub fn div(&self, rhs: &ComplexAmp) -> ComplexAmp {
        let p = self.prec();
        let den = rhs.norm_sqr();
        let num = self * &rhs.conj();
        ComplexAmp::new(Float::with_val(p, &num.re / &den), Float::with_val(p, &num.im / &den))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Debug for ComplexAmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.20e} {:+.20e}i)", self.re, self.im)
    }
}

impl fmt::Display for ComplexAmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64_pair();
        if im == 0.0 {
            write!(f, "{re}")
        } else {
            write!(f, "{re}{im:+}i")
        }
    }
}

impl<'a> Add<&'a ComplexAmp> for &'a ComplexAmp {
    type Output = ComplexAmp;
    fn add(self, rhs: &'a ComplexAmp) -> ComplexAmp {
        let p = self.prec();
        ComplexAmp::new(Float::with_val(p, &self.re + &rhs.re), Float::with_val(p, &self.im + &rhs.im))
    }
}

impl<'a> Sub<&'a ComplexAmp> for &'a ComplexAmp {
    type Output = ComplexAmp;
    fn sub(self, rhs: &'a ComplexAmp) -> ComplexAmp {
        let p = self.prec();
        ComplexAmp::new(Float::with_val(p, &self.re - &rhs.re), Float::with_val(p, &self.im - &rhs.im))
    }
}

impl<'a> Mul<&'a ComplexAmp> for &'a ComplexAmp {
    type Output = ComplexAmp;
    fn mul(self, rhs: &'a ComplexAmp) -> ComplexAmp {
        let p = self.prec();
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re -= Float::with_val(p, &self.im * &rhs.im);
        let mut im = Float::with_val(p, &self.re * &rhs.im);
        im += Float::with_val(p, &self.im * &rhs.re);
        ComplexAmp::new(re, im)
    }
}

impl Neg for &ComplexAmp {
    type Output = ComplexAmp;
    fn neg(self) -> ComplexAmp {
        let p = self.prec();
        ComplexAmp::new(Float::with_val(p, -&self.re), Float::with_val(p, -&self.im))
    }
}

/// One left-to-right step `ψ_{j+1} = F(ψ_{j-1}, ψ_j; ω)` of a lattice recurrence.
pub trait StepMap: Sync {
    fn step(&self, prev: &ComplexAmp, curr: &ComplexAmp, omega: &ComplexAmp) -> ComplexAmp;

    /// Real-amplitude specialisation for real `ω`, real `ψ₀`.
    fn step_real(&self, prev: &Float, curr: &Float, omega: &Float) -> Float;
}

/// How a recurrence run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "site")]
pub enum Verdict {
    /// Reached the requested last site.
    Completed,
    /// `|ψ_site|` crossed the divergence ceiling; `site` is the last recorded index.
    Diverged(usize),
    /// `|ψ_m|` stayed below the vanishing floor for every recorded `m ≥ site`.
    Vanished(usize),
}

/// Recorded amplitudes `ψ₀..ψ_J` of one run plus its termination verdict.
#[derive(Clone, Debug)]
pub struct LatticeState {
    amps: Vec<ComplexAmp>,
    verdict: Verdict,
}

impl LatticeState {
    pub(crate) fn from_parts(amps: Vec<ComplexAmp>, verdict: Verdict) -> Self {
        debug_assert!(!amps.is_empty());
        LatticeState { amps, verdict }
    }

    pub fn amps(&self) -> &[ComplexAmp] {
        &self.amps
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn last_site(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn magnitudes(&self) -> Vec<Float> {
        self.amps.iter().map(ComplexAmp::abs).collect()
    }

    pub fn max_abs(&self) -> Float {
        max_abs(&self.amps)
    }

    pub fn into_amps(self) -> Vec<ComplexAmp> {
        self.amps
    }
}

pub(crate) fn max_abs(amps: &[ComplexAmp]) -> Float {
    let p = amps.first().map_or(64, ComplexAmp::prec);
    amps.iter().map(ComplexAmp::abs).fold(Float::new(p), |m, a| if a > m { a } else { m })
}

fn fault(site: usize, amp: &ComplexAmp) -> Error {
    Error::NumericFault { site, detail: format!("non-finite amplitude {amp:?}") }
}

/// Iterates the step map from `ψ₋₁ = 0, ψ₀` up to site `max_site`, stopping early on
/// divergence or on [`VANISH_RUN`] consecutive sites below the vanishing floor.
pub fn run_recurrence<M: StepMap + ?Sized>(
    model: &M,
    psi0: &ComplexAmp,
    omega: &ComplexAmp,
    max_site: usize,
    ctx: &Precision,
) -> Result<LatticeState> {
    if max_site < 1 {
        return Err(Error::config("recurrence needs at least one step (max_site >= 1)"));
    }
    let omega = omega.at(ctx);
    let psi0 = psi0.at(ctx);
    if !psi0.is_finite() || !omega.is_finite() {
        return Err(fault(0, &psi0));
    }
    let diverge_sq = Float::with_val(ctx.bits(), ctx.diverge_threshold().square_ref());
    let vanish_sq = Float::with_val(ctx.bits(), ctx.vanish_threshold().square_ref());

    let mut below = usize::from(psi0.norm_sqr() < vanish_sq);
    let mut amps = Vec::with_capacity(max_site.min(4096) + 1);
    amps.push(psi0);
    let mut prev = ComplexAmp::zero(ctx);
    for site in 1..=max_site {
        let next = model.step(&prev, &amps[site - 1], &omega);
        if !next.is_finite() {
            return Err(fault(site, &next));
        }
        let n2 = next.norm_sqr();
        prev = amps[site - 1].clone();
        amps.push(next);
        if n2 > diverge_sq {
            return Ok(LatticeState::from_parts(amps, Verdict::Diverged(site)));
        }
        if n2 < vanish_sq {
            below += 1;
            if below == VANISH_RUN {
                let first = site + 1 - VANISH_RUN;
                return Ok(LatticeState::from_parts(amps, Verdict::Vanished(first)));
            }
        } else {
            below = 0;
        }
    }
    Ok(LatticeState::from_parts(amps, Verdict::Completed))
}

/// Amplitudes `ψ₀..ψ_through` with no early termination.
pub fn iterate_sites<M: StepMap + ?Sized>(
    model: &M,
    psi0: &ComplexAmp,
    omega: &ComplexAmp,
    through: usize,
    ctx: &Precision,
) -> Result<Vec<ComplexAmp>> {
    let zero = ComplexAmp::zero(ctx);
    let mut amps = vec![psi0.at(ctx)];
    extend_sites(model, &zero, &mut amps, &omega.at(ctx), through)?;
    Ok(amps)
}

/// Appends sites to `amps` (whose first entry is preceded by `before`) until
/// `amps.len() == through + 1`.
pub fn extend_sites<M: StepMap + ?Sized>(
    model: &M,
    before: &ComplexAmp,
    amps: &mut Vec<ComplexAmp>,
    omega: &ComplexAmp,
    through: usize,
) -> Result<()> {
    while amps.len() <= through {
        let n = amps.len();
        let prev = if n >= 2 { &amps[n - 2] } else { before };
        let next = model.step(prev, &amps[n - 1], omega);
        if !next.is_finite() {
            return Err(fault(n, &next));
        }
        amps.push(next);
    }
    Ok(())
}

/// Real-amplitude boundary value `ψ_{n+1}` together with `max_j |ψ_j|`.
pub fn boundary_value_real<M: StepMap + ?Sized>(
    model: &M,
    psi0: &Float,
    omega: &Float,
    n: usize,
) -> (Float, Float) {
    let p = psi0.prec();
    let mut prev = Float::new(p);
    let mut curr = psi0.clone();
    let mut peak = Float::with_val(p, curr.abs_ref());
    for _ in 0..=n {
        let next = model.step_real(&prev, &curr, omega);
        prev = std::mem::replace(&mut curr, next);
        if prev.is_finite() {
            let a = Float::with_val(p, prev.abs_ref());
            if a > peak {
                peak = a;
            }
        }
    }
    (curr, peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelParams;

    #[test]
    fn thresholds_follow_digits() {
        let c = Precision::new(16).unwrap();
        assert_eq!(c.diverge_threshold().to_f64(), 1e8);
        assert_eq!(c.vanish_threshold().to_f64(), 1e-8);
        let c = Precision::new(21).unwrap();
        assert!((log10_abs(c.diverge_threshold()) - 10.5).abs() < 1e-12);
        assert!((log10_abs(c.vanish_threshold()) + 10.5).abs() < 1e-12);
        let c = Precision::new(200).unwrap();
        assert!((log10_abs(c.diverge_threshold()) - 100.0).abs() < 1e-12);
        assert!((log10_abs(c.vanish_threshold()) + 100.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_low_precision() {
        assert!(matches!(Precision::new(15), Err(Error::Config(_))));
    }

    #[test]
    fn threshold_overrides_are_validated() {
        let c = Precision::new(30).unwrap();
        assert!(c.clone().with_diverge_exponent(-1.0).is_err());
        assert!(c.clone().with_vanish_exponent(0.5).is_err());
        // below the 10^(-digits+4) floor
        assert!(c.clone().with_vanish_exponent(-27.0).is_err());
        let c = c.with_vanish_exponent(-26.0).unwrap().with_diverge_exponent(300.0).unwrap();
        assert!((log10_abs(c.diverge_threshold()) - 300.0).abs() < 1e-12);
    }

    #[test]
    fn digit_estimate() {
        assert_eq!(required_digits_estimate(7, 10), 30);
        assert_eq!(required_digits_estimate(100, 20), 220);
        assert_eq!(required_digits_estimate(40, 0), 80);
    }

    #[test]
    fn single_site_solution_vanishes() {
        let ctx = Precision::new(30).unwrap();
        let m = ModelParams::dnls(1.0, 0.0).unwrap();
        let one = ComplexAmp::real_f64(1.0, &ctx);
        let s = run_recurrence(&m, &one, &one, 50, &ctx).unwrap();
        assert_eq!(s.verdict(), Verdict::Vanished(1));
        assert_eq!(s.len(), 1 + VANISH_RUN);
        assert!(s.amps()[1..].iter().all(ComplexAmp::is_zero));
    }

    #[test]
    fn linear_limit_is_geometric() {
        let ctx = Precision::new(40).unwrap();
        let m = ModelParams::dnls(0.0, 0.0).unwrap();
        let psi0 = ComplexAmp::from_f64(0.7, -0.2, &ctx);
        let w = ComplexAmp::from_f64(0.9, 0.3, &ctx);
        let amps = iterate_sites(&m, &psi0, &w, 30, &ctx).unwrap();
        let mut expect = psi0.clone();
        for a in &amps[1..] {
            expect = &expect * &w;
            assert_eq!(a, &expect);
        }
    }

    #[test]
    fn zero_steps_is_a_config_error() {
        let ctx = Precision::new(30).unwrap();
        let m = ModelParams::dnls(1.0, 0.0).unwrap();
        let one = ComplexAmp::real_f64(1.0, &ctx);
        assert!(run_recurrence(&m, &one, &one, 0, &ctx).is_err());
    }

    #[test]
    fn exponent_of_tiny_values() {
        let ctx = Precision::new(400).unwrap();
        let x = ctx.pow10(-350.3);
        assert_eq!(leading_exponent(&x), Some(-351));
        assert_eq!(leading_exponent(&ctx.zero()), None);
    }
}
