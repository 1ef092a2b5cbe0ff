//! Continuum bands of the semi-infinite chains and the numerical probes that check them.
//!
//! A real frequency belongs to the continuum when the semi-infinite recurrence started at
//! the left edge stays bounded and decays. Out-of-band probes either blow up or settle on
//! a nonzero envelope, which is what [`verify_band_edge`] looks for.

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelParams};
use crate::numerics::{
    iterate_sites, log10_abs, run_recurrence, ComplexAmp, Precision, Verdict,
};
use crate::solver::{find_stationary_obc, residual_at, shoot, Axis, ScanGrid, SolutionRecord};

/// Per-site envelope ratio below which a completed probe counts as decaying.
const DECAY_RATIO: f64 = 1.0 - 2.5e-3;

/// Largest admissible offset index of the amplitude peak.
pub const N_OFFSET_WINDOW: usize = 50;

/// γ above which the ψ_n-corrected band formula is flagged unreliable.
pub const RELIABLE_GAMMA: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandSource {
    Analytic,
    NumericScan,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
    pub empty: bool,
    pub source: BandSource,
    /// False when the generating formula is used outside its regime of validity.
    pub reliable: bool,
}

impl BandInterval {
    pub fn new(lo: f64, hi: f64, lo_open: bool, hi_open: bool, source: BandSource) -> Self {
        let empty = if lo_open || hi_open { lo >= hi } else { lo > hi };
        BandInterval { lo, hi, lo_open, hi_open, empty, source, reliable: true }
    }

    pub fn open(lo: f64, hi: f64, source: BandSource) -> Self {
        BandInterval::new(lo, hi, true, true, source)
    }

    pub fn contains(&self, x: f64) -> bool {
        if self.empty {
            return false;
        }
        let above = if self.lo_open { x > self.lo } else { x >= self.lo };
        let below = if self.hi_open { x < self.hi } else { x <= self.hi };
        above && below
    }

    pub fn width(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.hi - self.lo
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BandClass {
    InBandDecay,
    OutOfBandDivergence,
    Indeterminate,
}

#[derive(Clone, Debug)]
pub struct BandVerdict {
    pub omega: ComplexAmp,
    pub classification: BandClass,
    /// Sites iterated before the classification was reached.
    pub sites_to_verdict: usize,
    /// Index and magnitude of the last maximum of `|ψ_j|`.
    pub peak_site: usize,
    pub peak: Float,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gamma: f64,
    pub g: f64,
    pub psi0_mag: f64,
    pub gaps: Vec<BandInterval>,
    /// Indeterminate runs touching the window edges.
    pub edge_indeterminate: Vec<BandInterval>,
    pub resolution: f64,
}

/// Real continuum band of the semi-infinite DNLS chain.
///
/// At `γ = 0` this is `(−(1 − g|ψ₀|²), 1]`. For `γ > 0` the lower edge is set by the
/// amplitude `ψ_n` at the peak of the profile, `(−(1 + γ − g|ψ_n|²), 1 + γ]`, and
/// `psin_mag` must be supplied.
pub fn dnls_real_band(g: f64, psi0_mag: f64, gamma: f64, psin_mag: Option<f64>) -> Result<BandInterval> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::config(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    if gamma == 0.0 {
        let a = g * psi0_mag * psi0_mag;
        return Ok(BandInterval::new(a - 1.0, 1.0, true, false, BandSource::Analytic));
    }
    let psin = psin_mag.ok_or_else(|| {
        Error::MissingInput("gamma > 0 needs the peak amplitude psi_n (see find_n_offset)".into())
    })?;
    let mut band =
        BandInterval::new(g * psin * psin - (1.0 + gamma), 1.0 + gamma, true, false, BandSource::Analytic);
    if gamma > RELIABLE_GAMMA {
        log::warn!("band formula at gamma = {gamma} is outside its small-gamma regime");
        band.reliable = false;
    }
    Ok(band)
}

/// [`dnls_real_band`] with `ψ_n` measured at the lower edge itself.
///
/// The peak amplitude depends on `ω`, so the edge is the root of
/// `ω + 1 + γ − g|ψ_n(ω)|²`, found by bisection.
pub fn dnls_real_band_numeric(model: &ModelParams, psi0_mag: f64, ctx: &Precision) -> Result<BandInterval> {
    require_dnls(model)?;
    let (g, gamma) = (model.g, model.gamma);
    if gamma == 0.0 {
        return dnls_real_band(g, psi0_mag, 0.0, None);
    }
    let edge = |w: f64| -> f64 {
        match find_n_offset(model, psi0_mag, w, ctx) {
            Ok((_, psin)) => {
                let p = psin.to_f64();
                w + 1.0 + gamma - g * p * p
            }
            Err(_) => -1.0,
        }
    };
    let top = 1.0 + gamma;
    let (mut lo, mut hi) = (-top, top / 2.0);
    if edge(hi) <= 0.0 {
        let mut band = BandInterval::new(top, top, true, false, BandSource::NumericScan);
        band.empty = true;
        return Ok(band);
    }
    if edge(lo) > 0.0 {
        hi = lo;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if edge(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (_, psin) = find_n_offset(model, psi0_mag, hi, ctx).unwrap_or((0, ctx.float(psi0_mag)));
    let mut band = dnls_real_band(g, psi0_mag, gamma, Some(psin.to_f64()))?;
    band.lo = hi;
    band.source = BandSource::NumericScan;
    Ok(band)
}

/// Bound on `|ω_I|` at real part `ω_R` for the `γ = 0` DNLS chain:
/// `|ω_I| < sqrt(min(1 − (ω_R − g|ψ₀|²)², 1 − ω_R²))`.
pub fn dnls_imag_band(omega_r: f64, g: f64, psi0_mag: f64) -> BandInterval {
    let a = g * psi0_mag * psi0_mag;
    let shifted = 1.0 - (omega_r - a) * (omega_r - a);
    let bare = 1.0 - omega_r * omega_r;
    let m = shifted.min(bare);
    if m <= 0.0 {
        let mut band = BandInterval::open(0.0, 0.0, BandSource::Analytic);
        band.empty = true;
        return band;
    }
    let r = m.sqrt();
    BandInterval::open(-r, r, BandSource::Analytic)
}

/// Open band `(−1 − γ, 1 + γ)` of the semi-infinite AL chain.
pub fn al_semi_infinite_band(gamma: f64) -> BandInterval {
    BandInterval::open(-1.0 - gamma, 1.0 + gamma, BandSource::Analytic)
}

fn require_dnls(model: &ModelParams) -> Result<()> {
    if model.kind != ModelKind::Dnls {
        return Err(Error::config("operation requires the dnls model"));
    }
    Ok(())
}

/// Probe length used when none is given: `max(200, 4·digits)`.
pub fn default_probe_len(ctx: &Precision) -> usize {
    200usize.max(4 * ctx.digits() as usize)
}

/// Last index attaining `max_j |ψ_j|`, with that magnitude.
fn last_peak(mags: &[Float]) -> (usize, Float) {
    let mut best = 0;
    for (j, m) in mags.iter().enumerate() {
        if *m >= mags[best] {
            best = j;
        }
    }
    (best, mags[best].clone())
}

/// Strictly shrinking second half whose per-site ratio stays clear of 1, as in
/// `|ψ_j| ~ λ^j` with `λ` just below 1. A tail settling onto a nonzero value has its
/// ratio closing in on 1 and is rejected.
fn slow_geometric_decay(mags: &[Float]) -> bool {
    let tail = &mags[mags.len() / 2..];
    if tail.len() < 4 || tail.windows(2).any(|w| w[1] >= w[0]) {
        return false;
    }
    let ratio = |i: usize| Float::with_val(64, &tail[i + 1] / &tail[i]).to_f64();
    let (first, last) = (ratio(0), ratio(tail.len() - 2));
    last < 1.0 && last - first < 0.1 * (1.0 - last)
}

fn envelope_ratio(mags: &[Float]) -> f64 {
    let q = mags.len() / 4;
    if q == 0 {
        return f64::INFINITY;
    }
    let max_of = |s: &[Float]| s.iter().map(|m| m.to_f64()).fold(0.0f64, f64::max);
    let m3 = max_of(&mags[2 * q..3 * q]);
    let m4 = max_of(&mags[3 * q..]);
    if m3 == 0.0 {
        return if m4 == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (m4 / m3).powf(1.0 / q as f64)
}

/// Classifies a semi-infinite probe at frequency `ω`.
///
/// Divergence past the ceiling or a settled nonzero envelope means out of band; a sustained
/// drop below the vanishing floor, or an envelope shrinking geometrically after an early
/// peak, means in band.
pub fn verify_band_edge(
    model: &ModelParams,
    psi0_mag: f64,
    omega: &ComplexAmp,
    probe_len: usize,
    ctx: &Precision,
) -> Result<BandVerdict> {
    if probe_len < 50 {
        return Err(Error::config(format!("probe length must be at least 50, got {probe_len}")));
    }
    let psi0 = ComplexAmp::real(ctx.float(psi0_mag));
    let run = run_recurrence(model, &psi0, omega, probe_len, ctx)?;
    let mags = run.magnitudes();
    let (peak_site, peak) = last_peak(&mags);
    let (classification, sites) = match run.verdict() {
        Verdict::Diverged(j) => (BandClass::OutOfBandDivergence, j),
        Verdict::Vanished(j) => (BandClass::InBandDecay, j),
        Verdict::Completed => {
            let rho = envelope_ratio(&mags);
            let decaying = rho <= DECAY_RATIO || slow_geometric_decay(&mags);
            let class = if !decaying {
                BandClass::OutOfBandDivergence
            } else if peak_site <= probe_len / 2 {
                BandClass::InBandDecay
            } else {
                BandClass::Indeterminate
            };
            (class, probe_len)
        }
    };
    Ok(BandVerdict { omega: omega.clone(), classification, sites_to_verdict: sites, peak_site, peak })
}

/// Offset `n` of the profile peak beyond which `|ψ_j|` only decreases, and `|ψ_n|`.
pub fn find_n_offset(model: &ModelParams, psi0_mag: f64, omega: f64, ctx: &Precision) -> Result<(usize, Float)> {
    require_dnls(model)?;
    let w = ComplexAmp::real(ctx.float(omega));
    let v = verify_band_edge(model, psi0_mag, &w, default_probe_len(ctx), ctx)?;
    if v.classification != BandClass::InBandDecay {
        return Err(Error::Indeterminate(format!("omega = {omega} does not decay ({:?})", v.classification)));
    }
    if v.peak_site >= N_OFFSET_WINDOW {
        return Err(Error::Indeterminate(format!(
            "peak at site {} lies beyond the {N_OFFSET_WINDOW}-site window",
            v.peak_site
        )));
    }
    Ok((v.peak_site, v.peak))
}

/// Classification of every real `ω` on the sweep, in order.
pub fn classify_sweep(
    model: &ModelParams,
    psi0_mag: f64,
    axis: &Axis,
    ctx: &Precision,
) -> Result<Vec<(f64, BandClass)>> {
    let probe_len = default_probe_len(ctx);
    axis.values()
        .into_par_iter()
        .map(|w| {
            let v = verify_band_edge(model, psi0_mag, &ComplexAmp::real(ctx.float(w)), probe_len, ctx)?;
            Ok((w, v.classification))
        })
        .collect()
}

/// Forbidden sub-bands of the DNLS continuum on a real `ω` window.
///
/// A gap is a maximal run of non-decaying probes with decaying probes on both sides.
pub fn find_gap(
    g: f64,
    psi0_mag: f64,
    gamma: f64,
    window: (f64, f64),
    resolution: f64,
    ctx: &Precision,
) -> Result<GapReport> {
    if !(resolution > 0.0 && resolution <= 0.005) {
        return Err(Error::config(format!("gap resolution must lie in (0, 0.005], got {resolution}")));
    }
    let model = ModelParams::dnls(g, gamma)?;
    let axis = Axis::with_step(window.0, window.1, resolution)?;
    let swept = classify_sweep(&model, psi0_mag, &axis, ctx)?;
    let half = axis.step() / 2.0;

    let mut gaps = Vec::new();
    let mut edge_indeterminate = Vec::new();
    let mut i = 0;
    while i < swept.len() {
        if swept[i].1 == BandClass::InBandDecay {
            i += 1;
            continue;
        }
        let start = i;
        while i < swept.len() && swept[i].1 != BandClass::InBandDecay {
            i += 1;
        }
        let end = i - 1;
        let interval = BandInterval::open(swept[start].0 - half, swept[end].0 + half, BandSource::NumericScan);
        if start > 0 && i < swept.len() {
            gaps.push(interval);
        } else if swept[start..=end].iter().any(|(_, c)| *c == BandClass::Indeterminate) {
            edge_indeterminate.push(interval);
        }
    }
    Ok(GapReport { gamma, g, psi0_mag, gaps, edge_indeterminate, resolution: axis.step() })
}

/// Largest `|ω_I|` on the axis whose complex probe at `ω_R + iω_I` decays.
pub fn max_decaying_imag(
    model: &ModelParams,
    psi0_mag: f64,
    omega_r: f64,
    im_axis: &Axis,
    ctx: &Precision,
) -> Result<Option<f64>> {
    let probe_len = default_probe_len(ctx);
    let found: Result<Vec<Option<f64>>> = im_axis
        .values()
        .into_par_iter()
        .map(|y| {
            let w = ComplexAmp::from_f64(omega_r, y, ctx);
            let v = verify_band_edge(model, psi0_mag, &w, probe_len, ctx)?;
            Ok((v.classification == BandClass::InBandDecay).then_some(y.abs()))
        })
        .collect();
    Ok(found?.into_iter().flatten().reduce(f64::max))
}

/// Two-dimensional classification map over a complex `ω` window, row-major in `ω_R`.
pub fn complex_band_map(
    model: &ModelParams,
    psi0_mag: f64,
    re_axis: &Axis,
    im_axis: &Axis,
    ctx: &Precision,
) -> Result<Vec<(f64, f64, BandClass)>> {
    let probe_len = default_probe_len(ctx);
    let points: Vec<(f64, f64)> = re_axis
        .values()
        .into_iter()
        .flat_map(|x| im_axis.values().into_iter().map(move |y| (x, y)))
        .collect();
    points
        .into_par_iter()
        .map(|(x, y)| {
            let v = verify_band_edge(model, psi0_mag, &ComplexAmp::from_f64(x, y, ctx), probe_len, ctx)?;
            Ok((x, y, v.classification))
        })
        .collect()
}

/// Termination of a thresholded run together with the unthresholded growth of `|ψ_j|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceProfile {
    pub verdict: Verdict,
    /// `log10 |ψ_j|` for `j = 0..=through`, iterated without a ceiling.
    pub log10_mags: Vec<f64>,
}

pub fn divergence_profile(
    model: &ModelParams,
    psi0_mag: f64,
    omega: &ComplexAmp,
    through: usize,
    ctx: &Precision,
) -> Result<DivergenceProfile> {
    let psi0 = ComplexAmp::real(ctx.float(psi0_mag));
    let verdict = run_recurrence(model, &psi0, omega, through, ctx)?.verdict();
    let amps = iterate_sites(model, &psi0, omega, through, ctx)?;
    let log10_mags = amps.iter().map(|a| log10_abs(&a.abs())).collect();
    Ok(DivergenceProfile { verdict, log10_mags })
}

/// Exact stationary solutions of the finite `γ = 0` AL chain on a real window.
///
/// The only root is `ω = 0` with `ψ_j = ψ₀ δ_{j,0}`. Any further root passing the tolerance
/// is re-tested at twice the digits and dropped if it does not survive.
pub fn al_exceptional_check(
    n: usize,
    g: f64,
    psi0_mag: f64,
    window: (f64, f64),
    ctx: &Precision,
) -> Result<Vec<SolutionRecord>> {
    let model = ModelParams::al(g, 0.0)?;
    let grid = ScanGrid::real_window(window.0, window.1)?;
    let found = find_stationary_obc(&model, psi0_mag, n, &grid, ctx)?;
    let fine = ctx.doubled();
    let mut out = Vec::with_capacity(found.len());
    for rec in found {
        if rec.omega.is_zero() {
            out.push(rec);
            continue;
        }
        let again = residual_at(&model, psi0_mag, &rec.omega.at(&fine), n, &fine)?;
        if again < fine.tolerance() {
            out.push(rec);
        } else {
            log::info!("dropped precision artifact at omega = {}", rec.omega);
        }
    }
    Ok(out)
}

/// Unnormalized `|ψ_{N+1}|` of the AL chain at frequency `ω`; the divergence ceiling when
/// the run blows up first.
pub fn quasi_stationary_residual(
    g: f64,
    gamma: f64,
    psi0_mag: f64,
    omega: &ComplexAmp,
    n: usize,
    ctx: &Precision,
) -> Result<Float> {
    let profile = quasi_stationary_profile(g, gamma, psi0_mag, omega, n, ctx)?;
    Ok(match profile {
        Some(amps) => amps[n + 1].abs(),
        None => ctx.diverge_threshold().clone(),
    })
}

/// Amplitudes `ψ₀..ψ_{N+1}` of the AL chain, or `None` on divergence.
pub fn quasi_stationary_profile(
    g: f64,
    gamma: f64,
    psi0_mag: f64,
    omega: &ComplexAmp,
    n: usize,
    ctx: &Precision,
) -> Result<Option<Vec<ComplexAmp>>> {
    let need = crate::numerics::required_digits_estimate(n, 20);
    if ctx.digits() < need {
        return Err(Error::config(format!("residual at N = {n} needs at least {need} digits, got {}", ctx.digits())));
    }
    let model = ModelParams::al(g, gamma)?;
    let psi0 = ComplexAmp::real(ctx.float(psi0_mag));
    let shot = shoot(&model, &psi0, omega, n, ctx)?;
    Ok((!shot.diverged).then_some(shot.amps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Precision {
        Precision::new(30).unwrap()
    }

    fn classify(model: &ModelParams, psi0: f64, w: f64, c: &Precision) -> BandClass {
        verify_band_edge(model, psi0, &ComplexAmp::real_f64(w, c), default_probe_len(c), c)
            .unwrap()
            .classification
    }

    #[test]
    fn real_band_examples() {
        let b = dnls_real_band(1.0, 1.0, 0.0, None).unwrap();
        assert_eq!((b.lo, b.hi, b.lo_open, b.hi_open, b.empty), (0.0, 1.0, true, false, false));
        assert!(dnls_real_band(1.0, 2f64.sqrt(), 0.0, None).unwrap().empty);
        let b = dnls_real_band(0.0, 5.0, 0.0, None).unwrap();
        assert_eq!((b.lo, b.hi), (-1.0, 1.0));
        assert!(matches!(dnls_real_band(1.0, 1.0, 0.1, None), Err(Error::MissingInput(_))));
        let b = dnls_real_band(1.0, 1.0, 0.1, Some(0.9)).unwrap();
        assert!((b.lo + 1.1 - 0.81).abs() < 1e-15 && b.hi == 1.1 && b.reliable);
        assert!(!dnls_real_band(1.0, 1.0, 0.8, Some(0.9)).unwrap().reliable);
    }

    #[test]
    fn imag_band_examples() {
        assert!(dnls_imag_band(1.0, 1.0, 1.0).empty);
        let b = dnls_imag_band(0.5, 0.5, 1.0);
        assert!((b.hi - 0.75f64.sqrt()).abs() < 1e-15 && b.lo == -b.hi);
        assert!(dnls_imag_band(1.5, 1.0, 0.3).empty);
    }

    #[test]
    fn al_band_examples() {
        let b = al_semi_infinite_band(0.0);
        assert_eq!((b.lo, b.hi, b.lo_open, b.hi_open), (-1.0, 1.0, true, true));
        assert_eq!(al_semi_infinite_band(0.5).hi, 1.5);
        assert!(!al_semi_infinite_band(0.0).contains(1.0));
    }

    #[test]
    fn edge_probes() {
        let c = ctx();
        let m = ModelParams::dnls(1.0, 0.0).unwrap();
        assert_eq!(classify(&m, 1.0, 1.01, &c), BandClass::OutOfBandDivergence);
        assert_eq!(classify(&m, 1.0, 0.5, &c), BandClass::InBandDecay);
        assert_eq!(classify(&m, 1.0, -0.01, &c), BandClass::OutOfBandDivergence);
        let al = ModelParams::al(1.0, 0.5).unwrap();
        assert_eq!(classify(&al, 1.0, 1.49, &c), BandClass::InBandDecay);
        assert_eq!(classify(&al, 1.0, 1.51, &c), BandClass::OutOfBandDivergence);
    }

    #[test]
    fn short_probe_rejected() {
        let c = ctx();
        let m = ModelParams::dnls(1.0, 0.0).unwrap();
        assert!(verify_band_edge(&m, 1.0, &ComplexAmp::real_f64(0.5, &c), 49, &c).is_err());
    }

    #[test]
    fn n_offset_examples() {
        let c = ctx();
        let m = ModelParams::dnls(1.0, 0.1).unwrap();
        let (n, _) = find_n_offset(&m, 1.0, 0.5, &c).unwrap();
        assert!(n < 10);
        let m = ModelParams::dnls(1.0, 0.05).unwrap();
        let (n, psin) = find_n_offset(&m, 0.5, 0.9, &c).unwrap();
        assert!(n < 10 && psin.is_finite());
        let m = ModelParams::dnls(1.0, 0.0).unwrap();
        assert_eq!(find_n_offset(&m, 1.0, 0.5, &c).unwrap().0, 0);
        assert!(matches!(find_n_offset(&m, 1.0, 1.2, &c), Err(Error::Indeterminate(_))));
    }

    #[test]
    fn numeric_lower_edge_for_small_gamma() {
        let c = ctx();
        for (gamma, edge) in [(0.05, -0.017), (0.1, -0.033)] {
            let m = ModelParams::dnls(1.0, gamma).unwrap();
            let b = dnls_real_band_numeric(&m, 1.0, &c).unwrap();
            assert!((b.lo - edge).abs() < 2e-3, "gamma={gamma}: {}", b.lo);
            assert_eq!(b.hi, 1.0 + gamma);
        }
    }

    #[test]
    fn no_gap_at_zero_gamma() {
        let c = ctx();
        let r = find_gap(1.0, 1.0, 0.0, (0.05, 0.95), 0.005, &c).unwrap();
        assert!(r.gaps.is_empty());
        // slow decay just below the upper edge is still in band
        assert!(find_gap(1.0, 1.0, 0.0, (0.9, 1.2), 0.002, &c).unwrap().gaps.is_empty());
        assert!(find_gap(1.0, 1.0, 0.0, (0.05, 0.95), 0.01, &c).is_err());
    }

    #[test]
    fn al_exceptional_single_root() {
        let c = ctx();
        let roots = al_exceptional_check(10, 1.0, 1.0, (-2.0, 2.0), &c).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].omega.is_zero());
        assert_eq!(roots[0].support, Some(1));
    }

    #[test]
    fn quasi_stationary_decay() {
        let c = Precision::new(120).unwrap();
        let r = quasi_stationary_residual(1.0, 0.0, 1.0, &ComplexAmp::real_f64(0.3, &c), 50, &c).unwrap();
        let e = log10_abs(&r);
        // each site shrinks by at least 0.3 and at most 0.3/(1+ψ²)
        assert!(e < 51.0 * 0.3f64.log10() + 1.0 && e > -40.0, "{e}");
        assert!(quasi_stationary_residual(1.0, 0.0, 1.0, &ComplexAmp::real_f64(0.3, &c), 60, &c).is_err());
    }

    #[test]
    fn divergence_profile_records_growth() {
        let c = Precision::new(40).unwrap();
        let m = ModelParams::dnls(1.0, 0.0).unwrap();
        let p = divergence_profile(&m, 1.0, &ComplexAmp::real_f64(4.0, &c), 12, &c).unwrap();
        assert!(matches!(p.verdict, Verdict::Diverged(_)));
        assert_eq!(p.log10_mags.len(), 13);
        assert!(p.log10_mags[12] > 1000.0);
    }
}
