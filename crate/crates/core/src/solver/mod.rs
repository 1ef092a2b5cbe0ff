//! Shooting-method search for stationary open-boundary solutions.
//!
//! A frequency `ω` is a stationary solution of an `N+1` site open chain when the
//! recurrence started from `ψ₋₁ = 0, ψ₀` lands on `ψ_{N+1} = 0`. Real frequencies are
//! bracketed on a dense grid and bisected; complex ones are polished with a damped
//! two-variable Newton iteration.

mod count;

pub use count::{count_solutions_small, CountedRoot, SolutionCount};

use std::cmp::Ordering;

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::bands;
use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelParams, Nonlinearity};
use crate::numerics::{
    boundary_value_real, extend_sites, max_abs, run_recurrence, ComplexAmp, Precision, StepMap,
    Verdict,
};

/// Grid points per unit `ω` used when a window is given without an explicit count.
pub const DEFAULT_DENSITY: f64 = 2000.0;

/// Normalized residual below which a no-sign-change cell is refined.
const REFINE_BELOW: f64 = 1e-3;
const REFINE_FACTOR: usize = 4;
const NEWTON_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BandTag {
    Fractal,
    Continuum,
    Discrete,
    Untagged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityTag {
    Stable,
    Unstable,
    Untested,
}

/// One stationary solution of the open chain.
#[derive(Clone, Debug)]
pub struct SolutionRecord {
    pub omega: ComplexAmp,
    pub psi0_mag: f64,
    /// Number of leading populated sites; `None` when the tail never vanished.
    pub support: Option<usize>,
    /// `|ψ_{N+1}| / max_j |ψ_j|`.
    pub residual: Float,
    pub band_tag: BandTag,
    pub stability_tag: StabilityTag,
}

impl SolutionRecord {
    pub fn omega_f64(&self) -> (f64, f64) {
        self.omega.to_f64_pair()
    }

    /// Profile `ψ₀..ψ_{n+1}` of this solution on an `n+1` site chain.
    pub fn profile<M: StepMap + ?Sized>(&self, model: &M, n: usize, ctx: &Precision) -> Result<Vec<ComplexAmp>> {
        let psi0 = ComplexAmp::real(ctx.float(self.psi0_mag));
        crate::numerics::iterate_sites(model, &psi0, &self.omega, n + 1, ctx)
    }
}

/// Evenly spaced samples `lo, …, hi`; a single point when `lo == hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        let axis = Axis { lo, hi, points };
        axis.validate()?;
        Ok(axis)
    }

    pub fn fixed(value: f64) -> Self {
        Axis { lo: value, hi: value, points: 1 }
    }

    /// `lo..=hi` with spacing no larger than `step`.
    pub fn with_step(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::config(format!("axis step must be positive, got {step}")));
        }
        if lo == hi {
            return Ok(Axis::fixed(lo));
        }
        let points = ((hi - lo) / step - 1e-9).ceil().max(1.0) as usize + 1;
        Axis::new(lo, hi, points)
    }

    /// `lo..=hi` at `density` points per unit length.
    pub fn with_density(lo: f64, hi: f64, density: f64) -> Result<Self> {
        Axis::with_step(lo, hi, 1.0 / density)
    }

    fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::config("axis bounds must be finite"));
        }
        if self.points == 1 && self.lo == self.hi {
            return Ok(());
        }
        if self.points < 2 || !(self.lo < self.hi) {
            return Err(Error::config(format!(
                "swept axis needs lo < hi and at least 2 points, got [{}, {}] x {}",
                self.lo, self.hi, self.points
            )));
        }
        Ok(())
    }

    pub fn is_fixed(&self) -> bool {
        self.points == 1
    }

    pub fn step(&self) -> f64 {
        if self.points < 2 {
            0.0
        } else {
            (self.hi - self.lo) / (self.points - 1) as f64
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.hi
        } else {
            self.lo + self.step() * i as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lo - slack && x <= self.hi + slack
    }
}

/// Scan window. Without an imaginary axis the search is restricted to real `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub omega_re: Axis,
    pub omega_im: Option<Axis>,
    pub psi0: Option<Axis>,
    #[serde(default)]
    pub branch: Nonlinearity,
}

impl ScanGrid {
    pub fn real(omega_re: Axis) -> Self {
        ScanGrid { omega_re, omega_im: None, psi0: None, branch: Nonlinearity::Modulus }
    }

    /// Real window sampled at [`DEFAULT_DENSITY`].
    pub fn real_window(lo: f64, hi: f64) -> Result<Self> {
        Ok(ScanGrid::real(Axis::with_density(lo, hi, DEFAULT_DENSITY)?))
    }

    pub fn complex(omega_re: Axis, omega_im: Axis) -> Self {
        ScanGrid { omega_re, omega_im: Some(omega_im), psi0: None, branch: Nonlinearity::Modulus }
    }

    pub fn with_psi0(mut self, psi0: Axis) -> Self {
        self.psi0 = Some(psi0);
        self
    }

    pub fn with_branch(mut self, branch: Nonlinearity) -> Self {
        self.branch = branch;
        self
    }

    pub fn is_complex(&self) -> bool {
        self.omega_im.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        self.omega_re.validate()?;
        if let Some(im) = &self.omega_im {
            im.validate()?;
        } else if self.omega_re.is_fixed() {
            return Err(Error::config("real scan needs a swept omega axis"));
        }
        if let Some(p) = &self.psi0 {
            p.validate()?;
        }
        Ok(())
    }

    /// Same window at `factor` times the resolution on every swept axis.
    pub fn refined(&self, factor: usize) -> Self {
        let up = |a: Axis| if a.is_fixed() { a } else { Axis { points: (a.points - 1) * factor + 1, ..a } };
        ScanGrid {
            omega_re: up(self.omega_re),
            omega_im: self.omega_im.map(up),
            psi0: self.psi0.map(up),
            branch: self.branch,
        }
    }
}

/// Boundary residual of one shot.
#[derive(Clone, Debug)]
pub struct Shot {
    /// `|ψ_{N+1}| / max_j |ψ_j|`, or the divergence ceiling when the run blew up.
    pub residual: Float,
    pub support: Option<usize>,
    pub diverged: bool,
    pub amps: Vec<ComplexAmp>,
}

/// Runs the chain `ψ₀..ψ_{N+1}` and measures how well the right edge is satisfied.
pub fn shoot<M: StepMap + ?Sized>(
    model: &M,
    psi0: &ComplexAmp,
    omega: &ComplexAmp,
    n: usize,
    ctx: &Precision,
) -> Result<Shot> {
    if n < 1 {
        return Err(Error::config("lattice needs N >= 1"));
    }
    let run = run_recurrence(model, psi0, omega, n + 1, ctx)?;
    let verdict = run.verdict();
    let mut amps = run.into_amps();
    if let Verdict::Diverged(_) = verdict {
        return Ok(Shot {
            residual: ctx.diverge_threshold().clone(),
            support: None,
            diverged: true,
            amps,
        });
    }
    if amps.len() < n + 2 {
        // a recorded run always has at least two sites, so `before` is never read
        extend_sites(model, &ComplexAmp::zero(ctx), &mut amps, &omega.at(ctx), n + 1)?;
    }
    let peak = max_abs(&amps[..=n]);
    let last = amps[n + 1].abs();
    let residual = if peak.is_zero() { last } else { Float::with_val(ctx.bits(), &last / &peak) };
    let support = support_of(&amps, ctx);
    Ok(Shot { residual, support, diverged: false, amps })
}

/// First index after which every recorded magnitude stays below the vanishing floor.
pub fn support_of(amps: &[ComplexAmp], ctx: &Precision) -> Option<usize> {
    let floor = ctx.vanish_threshold();
    let mut support = None;
    for (j, a) in amps.iter().enumerate().rev() {
        if a.abs() < *floor {
            support = Some(j);
        } else {
            break;
        }
    }
    support.filter(|&s| s >= 1)
}

/// `|ψ_{N+1}| / max_j |ψ_j|` at frequency `ω` with `ψ₋₁ = 0`.
///
/// Returns the divergence ceiling as a sentinel when the run diverges first.
pub fn residual_at<M: StepMap + ?Sized>(
    model: &M,
    psi0_mag: f64,
    omega: &ComplexAmp,
    n: usize,
    ctx: &Precision,
) -> Result<Float> {
    let psi0 = ComplexAmp::real(ctx.float(psi0_mag));
    Ok(shoot(model, &psi0, omega, n, ctx)?.residual)
}

/// All stationary solutions of the `N+1` site open chain inside the grid window.
///
/// Records are sorted by `(Re ω, Im ω)` and carry [`BandTag::Untagged`].
pub fn find_stationary_obc(
    model: &ModelParams,
    psi0_mag: f64,
    n: usize,
    grid: &ScanGrid,
    ctx: &Precision,
) -> Result<Vec<SolutionRecord>> {
    grid.validate()?;
    if n < 1 {
        return Err(Error::config("lattice needs N >= 1"));
    }
    if !psi0_mag.is_finite() || psi0_mag < 0.0 {
        return Err(Error::config(format!("psi0 must be finite and >= 0, got {psi0_mag}")));
    }
    let branched = model.with_branch(grid.branch);
    let mut found = if grid.is_complex() {
        complex_roots(&branched, psi0_mag, n, grid, ctx)?
    } else {
        real_roots(&branched, psi0_mag, n, &grid.omega_re, ctx)?
    };
    sort_records(&mut found);
    Ok(dedup(found, ctx))
}

fn sort_records(records: &mut [SolutionRecord]) {
    records.sort_by(|a, b| {
        a.omega
            .re()
            .partial_cmp(b.omega.re())
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.omega.im().partial_cmp(b.omega.im()).unwrap_or(Ordering::Equal))
            .then_with(|| a.support.cmp(&b.support))
    });
}

/// Keeps one record per `(ω, support)`, merging frequencies closer than the merge tolerance.
fn dedup(records: Vec<SolutionRecord>, ctx: &Precision) -> Vec<SolutionRecord> {
    let tol = ctx.merge_tolerance();
    let mut out: Vec<SolutionRecord> = Vec::with_capacity(records.len());
    for rec in records {
        let duplicate = out.iter_mut().rev().take_while(|o| {
            let gap = Float::with_val(ctx.bits(), rec.omega.re() - o.omega.re());
            gap.abs() <= tol
        });
        let mut merged = false;
        for o in duplicate {
            if o.support != rec.support {
                continue;
            }
            let d = (&rec.omega - &o.omega).abs();
            if d <= tol {
                if rec.residual < o.residual {
                    *o = rec.clone();
                }
                merged = true;
                break;
            }
        }
        if !merged {
            out.push(rec);
        }
    }
    out
}

fn record<M: StepMap + ?Sized>(
    model: &M,
    psi0_mag: f64,
    omega: ComplexAmp,
    n: usize,
    ctx: &Precision,
) -> Result<Option<SolutionRecord>> {
    let psi0 = ComplexAmp::real(ctx.float(psi0_mag));
    let shot = shoot(model, &psi0, &omega, n, ctx)?;
    if shot.diverged || shot.residual >= ctx.tolerance() {
        return Ok(None);
    }
    Ok(Some(SolutionRecord {
        omega,
        psi0_mag,
        support: shot.support,
        residual: shot.residual,
        band_tag: BandTag::Untagged,
        stability_tag: StabilityTag::Untested,
    }))
}

/// Signed `ψ_{N+1}` and its normalization at a real frequency.
#[derive(Clone)]
struct Sample {
    omega: Float,
    value: Float,
    /// `|ψ_{N+1}| / max_j |ψ_j|` as an `f64`; infinite when not finite.
    scaled: f64,
}

impl Sample {
    fn take<M: StepMap + ?Sized>(model: &M, psi0: &Float, omega: Float, n: usize) -> Self {
        let (value, peak) = boundary_value_real(model, psi0, &omega, n);
        let scaled = if !value.is_finite() {
            f64::INFINITY
        } else if peak.is_zero() {
            value.to_f64().abs()
        } else {
            Float::with_val(value.prec(), &value / &peak).to_f64().abs()
        };
        Sample { omega, value, scaled }
    }

    fn sign(&self) -> Option<Ordering> {
        if self.value.is_nan() {
            None
        } else {
            self.value.cmp0()
        }
    }
}

fn opposite(a: &Sample, b: &Sample) -> bool {
    matches!(
        (a.sign(), b.sign()),
        (Some(Ordering::Less), Some(Ordering::Greater)) | (Some(Ordering::Greater), Some(Ordering::Less))
    )
}

enum Candidate {
    Exact(Float),
    Bracket(Sample, Sample),
    Valley(Float, Float),
}

fn real_roots<M: StepMap + ?Sized>(
    model: &M,
    psi0_mag: f64,
    n: usize,
    axis: &Axis,
    ctx: &Precision,
) -> Result<Vec<SolutionRecord>> {
    let psi0 = ctx.float(psi0_mag);
    let samples: Vec<Sample> = (0..axis.points)
        .into_par_iter()
        .map(|i| Sample::take(model, &psi0, ctx.float(axis.value(i)), n))
        .collect();

    let mut candidates = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if s.sign() == Some(Ordering::Equal) {
            candidates.push(Candidate::Exact(s.omega.clone()));
        }
        if let Some(next) = samples.get(i + 1) {
            if opposite(s, next) {
                candidates.push(Candidate::Bracket(s.clone(), next.clone()));
            }
        }
    }

    // a cell whose endpoints are both nearly zero may hide a pair of roots
    let quiet: Vec<usize> = (0..samples.len().saturating_sub(1))
        .filter(|&i| {
            !opposite(&samples[i], &samples[i + 1])
                && samples[i].scaled < REFINE_BELOW
                && samples[i + 1].scaled < REFINE_BELOW
        })
        .collect();
    let refined: Vec<Vec<Sample>> = quiet
        .par_iter()
        .map(|&i| {
            let lo = axis.value(i);
            let h = (axis.value(i + 1) - lo) / REFINE_FACTOR as f64;
            let mut cell = vec![samples[i].clone()];
            for k in 1..REFINE_FACTOR {
                cell.push(Sample::take(model, &psi0, ctx.float(lo + h * k as f64), n));
            }
            cell.push(samples[i + 1].clone());
            cell
        })
        .collect();
    let mut refined_hit = vec![false; samples.len()];
    for (&i, cell) in quiet.iter().zip(&refined) {
        for w in cell.windows(2) {
            if opposite(&w[0], &w[1]) {
                candidates.push(Candidate::Bracket(w[0].clone(), w[1].clone()));
                refined_hit[i] = true;
            }
        }
        for s in &cell[1..cell.len() - 1] {
            if s.sign() == Some(Ordering::Equal) {
                candidates.push(Candidate::Exact(s.omega.clone()));
                refined_hit[i] = true;
            }
        }
    }

    // touching roots leave no sign change, only a dip in |ψ_{N+1}|
    for i in 1..samples.len().saturating_sub(1) {
        let (a, b, c) = (&samples[i - 1], &samples[i], &samples[i + 1]);
        if b.scaled < REFINE_BELOW
            && b.scaled <= a.scaled
            && b.scaled <= c.scaled
            && b.sign() != Some(Ordering::Equal)
            && !opposite(a, b)
            && !opposite(b, c)
            && !refined_hit[i - 1]
            && !refined_hit[i]
        {
            candidates.push(Candidate::Valley(a.omega.clone(), c.omega.clone()));
        }
    }

    let roots: Vec<Option<Float>> = candidates
        .into_par_iter()
        .map(|c| match c {
            Candidate::Exact(w) => Some(w),
            Candidate::Bracket(a, b) => Some(bisect(model, &psi0, a, b, n, ctx)),
            Candidate::Valley(lo, hi) => golden_min(model, &psi0, lo, hi, n, ctx),
        })
        .collect();

    let mut out = Vec::new();
    for w in roots.into_iter().flatten() {
        if let Some(r) = record(model, psi0_mag, ComplexAmp::real(w), n, ctx)? {
            out.push(r);
        }
    }
    Ok(out)
}

fn converged_width(width: &Float, at: &Float, ctx: &Precision) -> bool {
    let mut scale = Float::with_val(ctx.bits(), at.abs_ref());
    if scale < 1 {
        scale = ctx.float(1.0);
    }
    scale *= ctx.pow10(4.0 - f64::from(ctx.digits()));
    *width <= scale
}

fn bisect<M: StepMap + ?Sized>(
    model: &M,
    psi0: &Float,
    mut lo: Sample,
    mut hi: Sample,
    n: usize,
    ctx: &Precision,
) -> Float {
    let cap = 4 * ctx.bits() as usize;
    for _ in 0..cap {
        let width = Float::with_val(ctx.bits(), &hi.omega - &lo.omega);
        if converged_width(&width, &lo.omega, ctx) {
            break;
        }
        let mut mid = Float::with_val(ctx.bits(), &lo.omega + &hi.omega);
        mid /= 2;
        let m = Sample::take(model, psi0, mid, n);
        match m.sign() {
            Some(Ordering::Equal) => return m.omega,
            _ if opposite(&lo, &m) => hi = m,
            _ => lo = m,
        }
    }
    let mut mid = Float::with_val(ctx.bits(), &lo.omega + &hi.omega);
    mid /= 2;
    mid
}

/// Golden-section minimum of `|ψ_{N+1}|` on `[lo, hi]`, if it reaches zero within tolerance.
fn golden_min<M: StepMap + ?Sized>(
    model: &M,
    psi0: &Float,
    mut lo: Float,
    mut hi: Float,
    n: usize,
    ctx: &Precision,
) -> Option<Float> {
    let bits = ctx.bits();
    let inv_phi = {
        let mut s = ctx.float(5.0);
        s.sqrt_mut();
        s -= 1;
        s / 2u32
    };
    let abs_at = |w: &Float| {
        let (v, _) = boundary_value_real(model, psi0, w, n);
        Float::with_val(bits, v.abs_ref())
    };
    let cap = 4 * bits as usize;
    let span = |lo: &Float, hi: &Float| Float::with_val(bits, hi - lo);
    let mut x1 = Float::with_val(bits, &hi - Float::with_val(bits, &span(&lo, &hi) * &inv_phi));
    let mut x2 = Float::with_val(bits, &lo + Float::with_val(bits, &span(&lo, &hi) * &inv_phi));
    let mut f1 = abs_at(&x1);
    let mut f2 = abs_at(&x2);
    for _ in 0..cap {
        if converged_width(&span(&lo, &hi), &lo, ctx) || f1.is_zero() || f2.is_zero() {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = Float::with_val(bits, &hi - Float::with_val(bits, &span(&lo, &hi) * &inv_phi));
            f1 = abs_at(&x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = Float::with_val(bits, &lo + Float::with_val(bits, &span(&lo, &hi) * &inv_phi));
            f2 = abs_at(&x2);
        }
    }
    let best = if f1 < f2 { x1 } else { x2 };
    let shot = Sample::take(model, psi0, best.clone(), n);
    (shot.scaled < ctx.tolerance().to_f64()).then_some(best)
}

fn boundary<M: StepMap + ?Sized>(
    model: &M,
    psi0: &ComplexAmp,
    omega: &ComplexAmp,
    n: usize,
    ctx: &Precision,
) -> Option<ComplexAmp> {
    let amps = crate::numerics::iterate_sites(model, psi0, omega, n + 1, ctx).ok()?;
    amps.into_iter().nth(n + 1).filter(ComplexAmp::is_finite)
}

/// Damped Newton on `(Re ψ_{N+1}, Im ψ_{N+1})` over `(Re ω, Im ω)`.
fn newton<M: StepMap + ?Sized>(
    model: &M,
    psi0: &ComplexAmp,
    seed: ComplexAmp,
    n: usize,
    ctx: &Precision,
) -> Option<ComplexAmp> {
    let bits = ctx.bits();
    let mut w = seed;
    let mut f = boundary(model, psi0, &w, n, ctx)?;
    let h_rel = ctx.pow10(-f64::from(ctx.digits()) / 3.0);
    for _ in 0..NEWTON_MAX_ITER {
        if f.is_zero() {
            return Some(w);
        }
        let mut h = w.abs();
        if h < 1 {
            h = ctx.float(1.0);
        }
        h *= &h_rel;
        let zero = ctx.zero();
        let wx = &w + &ComplexAmp::new(h.clone(), zero.clone());
        let wy = &w + &ComplexAmp::new(zero, h.clone());
        let fx = boundary(model, psi0, &wx, n, ctx)?;
        let fy = boundary(model, psi0, &wy, n, ctx)?;
        let dx = (&fx - &f).scale(&Float::with_val(bits, 1 / &h));
        let dy = (&fy - &f).scale(&Float::with_val(bits, 1 / &h));
        // [a b; c d] = [∂Re/∂x ∂Re/∂y; ∂Im/∂x ∂Im/∂y]
        let (a, c) = (dx.re(), dx.im());
        let (b, d) = (dy.re(), dy.im());
        let det = Float::with_val(bits, a * d) - Float::with_val(bits, b * c);
        if det.is_zero() || !det.is_finite() {
            return None;
        }
        let sx = (Float::with_val(bits, d * f.re()) - Float::with_val(bits, b * f.im())) / &det;
        let sy = (Float::with_val(bits, a * f.im()) - Float::with_val(bits, c * f.re())) / &det;
        let step = ComplexAmp::new(Float::with_val(bits, -sx), Float::with_val(bits, -sy));

        let f_norm = f.norm_sqr();
        let mut lambda = ctx.float(1.0);
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &w + &step.scale(&lambda);
            if let Some(ft) = boundary(model, psi0, &trial, n, ctx) {
                if ft.norm_sqr() < f_norm {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda /= 2;
        }
        let step_len = Float::with_val(bits, step.abs() * &lambda);
        match accepted {
            Some((trial, ft)) => {
                w = trial;
                f = ft;
                if converged_width(&step_len, &w.abs(), ctx) {
                    return Some(w);
                }
            }
            None => return converged_width(&step_len, &w.abs(), ctx).then_some(w),
        }
    }
    log::debug!("newton seed did not converge after {NEWTON_MAX_ITER} iterations");
    None
}

fn complex_roots<M: StepMap + ?Sized>(
    model: &M,
    psi0_mag: f64,
    n: usize,
    grid: &ScanGrid,
    ctx: &Precision,
) -> Result<Vec<SolutionRecord>> {
    let re_axis = grid.omega_re;
    let im_axis = grid.omega_im.expect("complex scan has an imaginary axis");
    let psi0 = ComplexAmp::real(ctx.float(psi0_mag));
    let seeds: Vec<(f64, f64)> = re_axis
        .values()
        .into_iter()
        .flat_map(|x| im_axis.values().into_iter().map(move |y| (x, y)))
        .collect();
    let slack_re = re_axis.step().max(1e-9);
    let slack_im = im_axis.step().max(1e-9);

    let roots: Vec<ComplexAmp> = seeds
        .into_par_iter()
        .filter_map(|(x, y)| {
            let seed = ComplexAmp::from_f64(x, y, ctx);
            let root = newton(model, &psi0, seed, n, ctx);
            if root.is_none() {
                log::debug!("discarded newton seed ({x}, {y})");
            }
            root
        })
        .filter(|w| {
            let (x, y) = w.to_f64_pair();
            re_axis.contains(x, slack_re) && im_axis.contains(y, slack_im)
        })
        .collect();

    let mut out = Vec::new();
    for w in roots {
        // snap numerically real roots onto the axis
        let w = if w.im().clone().abs() < ctx.exact_tolerance() { ComplexAmp::real(w.re().clone()) } else { w };
        if let Some(r) = record(model, psi0_mag, w, n, ctx)? {
            out.push(r);
        }
    }
    Ok(out)
}

/// Band membership tag for a root at amplitude `ψ₀`.
fn band_tag(model: &ModelParams, rec: &SolutionRecord, ctx: &Precision) -> BandTag {
    let (x, y) = rec.omega_f64();
    if y != 0.0 {
        return BandTag::Fractal;
    }
    let interval = match model.kind {
        ModelKind::Dnls if model.gamma == 0.0 => bands::dnls_real_band(model.g, rec.psi0_mag, 0.0, None),
        ModelKind::Dnls => bands::dnls_real_band_numeric(model, rec.psi0_mag, ctx),
        ModelKind::AblowitzLadik => Ok(bands::al_semi_infinite_band(model.gamma)),
    };
    match interval {
        Ok(b) if b.contains(x) => BandTag::Continuum,
        Ok(_) => BandTag::Fractal,
        Err(_) => BandTag::Untagged,
    }
}

/// Roots for every `ψ₀` of the grid's amplitude axis, tagged by band membership and
/// ordered by `(ψ₀, ω)`.
pub fn fractal_scan(
    model: &ModelParams,
    n: usize,
    grid: &ScanGrid,
    ctx: &Precision,
) -> Result<Vec<SolutionRecord>> {
    let psi_axis = grid
        .psi0
        .ok_or_else(|| Error::MissingInput("fractal scan needs a psi0 axis".into()))?;
    let per_psi: Vec<Result<Vec<SolutionRecord>>> = psi_axis
        .values()
        .into_par_iter()
        .map(|psi0| {
            let mut roots = find_stationary_obc(model, psi0, n, grid, ctx)?;
            for r in &mut roots {
                r.band_tag = band_tag(model, r, ctx);
            }
            Ok(roots)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_psi {
        out.extend(r?);
    }
    Ok(out)
}

/// Counts of `ω − g ψ₀²` offsets over a set of roots, in bins of `width` centred on
/// multiples of `width`, most populated first.
pub fn offset_histogram(records: &[SolutionRecord], g: f64, width: f64) -> Vec<(f64, usize)> {
    let mut bins = std::collections::BTreeMap::<i64, usize>::new();
    for r in records {
        let (w, im) = r.omega_f64();
        if im != 0.0 {
            continue;
        }
        let offset = w - g * r.psi0_mag * r.psi0_mag;
        *bins.entry((offset / width).round() as i64).or_default() += 1;
    }
    let mut out: Vec<(f64, usize)> = bins.into_iter().map(|(k, c)| (k as f64 * width, c)).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal)));
    out
}
