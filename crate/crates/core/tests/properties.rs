use nhse::bands::{
    al_semi_infinite_band, default_probe_len, dnls_imag_band, dnls_real_band, quasi_stationary_profile,
    verify_band_edge, BandClass,
};
use nhse::models::{al_pbc_dispersion, closed_form_solutions, dnls_pbc_dispersion, two_site_frequencies};
use nhse::numerics::{required_digits_estimate, run_recurrence};
use nhse::solver::{
    count_solutions_small, find_stationary_obc, residual_at, Axis, BandTag, ScanGrid, SolutionRecord, StabilityTag,
};
use nhse::stability::{perturb_growth, Stability};
use nhse::{ComplexAmp, ModelParams, Precision, Verdict};
use proptest::prelude::*;
use rug::Float;

fn ctx() -> Precision {
    Precision::new(32).unwrap()
}

fn model(al: bool, g: f64, gamma: f64) -> ModelParams {
    if al { ModelParams::al(g, gamma) } else { ModelParams::dnls(g, gamma) }.unwrap()
}

fn close(a: &Float, b: &Float, rel: &Float) -> bool {
    let scale = Float::with_val(a.prec(), a.abs_ref()).max(&Float::with_val(a.prec(), 1));
    Float::with_val(a.prec(), a - b).abs() / scale <= *rel
}

fn record(sol_omega: &ComplexAmp, psi0: f64, support: usize, c: &Precision) -> SolutionRecord {
    SolutionRecord {
        omega: sol_omega.clone(),
        psi0_mag: psi0,
        support: Some(support),
        residual: c.zero(),
        band_tag: BandTag::Discrete,
        stability_tag: StabilityTag::Untested,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn phase_of_psi0_rotates_every_site(
        r in 0.1f64..2.5, theta in 0.0f64..std::f64::consts::TAU, w in -1.0f64..3.0, wi in -0.3f64..0.3,
        gamma in 0.0f64..0.9, al: bool,
    ) {
        let c = ctx();
        let m = model(al, 1.0, gamma);
        let omega = ComplexAmp::from_f64(w, wi, &c);
        let phase = c.float(theta);
        let a = run_recurrence(&m, &ComplexAmp::real_f64(r, &c), &omega, 30, &c).unwrap();
        let b = run_recurrence(&m, &ComplexAmp::real_f64(r, &c).rotate(&phase), &omega, 30, &c).unwrap();
        prop_assert_eq!(a.verdict(), b.verdict());
        let tol = c.pow10(-20.0);
        for (x, y) in a.amps().iter().zip(b.amps()) {
            let x = x.rotate(&phase);
            prop_assert!(close(x.re(), y.re(), &tol) && close(x.im(), y.im(), &tol));
        }
    }

    #[test]
    fn identical_inputs_are_bit_identical(r in 0.1f64..2.5, w in -1.0f64..3.0, gamma in 0.0f64..0.9, al: bool) {
        let c = ctx();
        let m = model(al, 1.0, gamma);
        let psi0 = ComplexAmp::real_f64(r, &c);
        let omega = ComplexAmp::real_f64(w, &c);
        let a = run_recurrence(&m, &psi0, &omega, 60, &c).unwrap();
        let b = run_recurrence(&m, &psi0, &omega, 60, &c).unwrap();
        prop_assert_eq!(a.verdict(), b.verdict());
        prop_assert_eq!(a.amps(), b.amps());
    }

    #[test]
    fn linear_chain_is_geometric(r in 0.1f64..2.0, w in -1.5f64..1.5) {
        let c = ctx();
        let m = ModelParams::dnls(0.0, 0.0).unwrap();
        let run = run_recurrence(&m, &ComplexAmp::real_f64(r, &c), &ComplexAmp::real_f64(w, &c), 20, &c).unwrap();
        let mut want = c.float(r);
        for a in run.amps() {
            prop_assert!(close(a.re(), &want, &c.pow10(-28.0)));
            prop_assert!(a.im().is_zero());
            want *= w;
        }
    }

    #[test]
    fn closed_forms_replay_to_zero(psi0 in 0.05f64..5.0, g in 0.2f64..3.0) {
        let c = ctx();
        let m = ModelParams::dnls(g, 0.0).unwrap();
        for sol in closed_form_solutions(psi0, &m, &c).unwrap() {
            let run = run_recurrence(&m, &ComplexAmp::real_f64(psi0, &c), &sol.omega, 40, &c).unwrap();
            prop_assert_eq!(run.verdict(), Verdict::Vanished(sol.support));
            prop_assert!(run.amps()[sol.support].abs() < c.exact_tolerance() * run.max_abs());
        }
    }

    #[test]
    fn linear_dispersion_limit(k in -10.0f64..10.0, gamma in 0.0f64..0.99, psi0 in 0.0f64..3.0) {
        let c = ctx();
        let m = ModelParams::dnls(0.0, gamma).unwrap();
        let w = dnls_pbc_dispersion(&c.float(k), psi0, &m, &c).unwrap();
        let (re, im) = w.to_f64_pair();
        prop_assert!((re - (1.0 + gamma) * k.cos()).abs() < 1e-14);
        prop_assert!((im - (1.0 - gamma) * k.sin()).abs() < 1e-14);
    }

    #[test]
    fn dispersions_are_periodic(k in -10.0f64..10.0, gamma in 0.0f64..0.99, psi0 in 0.0f64..3.0, g in 0.0f64..2.0) {
        let c = ctx();
        let two_pi = Float::with_val(c.bits(), c.pi() * 2u32);
        let k0 = c.float(k);
        let k1 = Float::with_val(c.bits(), &k0 + &two_pi);
        let tol = c.pow10(-25.0);
        let d = ModelParams::dnls(g, gamma).unwrap();
        let a = ModelParams::al(g.max(1e-3), gamma).unwrap();
        for (x, y) in [
            (dnls_pbc_dispersion(&k0, psi0, &d, &c).unwrap(), dnls_pbc_dispersion(&k1, psi0, &d, &c).unwrap()),
            (al_pbc_dispersion(&k0, psi0, &a, &c).unwrap(), al_pbc_dispersion(&k1, psi0, &a, &c).unwrap()),
        ] {
            prop_assert!(close(x.re(), y.re(), &tol) && close(x.im(), y.im(), &tol));
        }
    }

    #[test]
    fn imag_band_mirrors_real_band(wr in -2.0f64..3.0, psi0 in 0.0f64..1.6, g in 0.2f64..1.5) {
        let ib = dnls_imag_band(wr, g, psi0);
        prop_assert_eq!(ib.lo, -ib.hi);
        let rb = dnls_real_band(g, psi0, 0.0, None).unwrap();
        let interior = rb.contains(wr) && wr < rb.hi;
        prop_assert_eq!(!ib.empty, interior);
    }

    #[test]
    fn al_phase_rotation_keeps_site_magnitudes(w in 0.05f64..0.95, theta in 0.0f64..std::f64::consts::TAU) {
        let n = 30;
        let c = Precision::new(required_digits_estimate(n, 20)).unwrap();
        let omega = ComplexAmp::real_f64(w, &c);
        let a = quasi_stationary_profile(1.0, 0.0, 1.0, &omega, n, &c).unwrap().unwrap();
        let b = quasi_stationary_profile(1.0, 0.0, 1.0, &omega.rotate(&c.float(theta)), n, &c).unwrap().unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(close(&x.abs(), &y.abs(), &c.pow10(6.0 - f64::from(c.digits()))));
        }
    }
}

#[test]
fn two_site_frequency_bounds() {
    let c = ctx();
    let floor = 3.0 * 3f64.sqrt() / 2.0;
    let mut lowest = f64::INFINITY;
    for i in 0..=400 {
        let psi0 = 10f64.powf(-2.0 + 4.0 * i as f64 / 400.0);
        let (minus, plus) = two_site_frequencies(psi0, 1.0, &c);
        assert!(minus > 0, "omega_minus at {psi0}");
        lowest = lowest.min(plus.to_f64());
        assert!(plus.to_f64() >= floor - 1e-12, "omega_plus at {psi0}");
    }
    assert!((lowest - floor).abs() < 1e-3);
    let (small, _) = two_site_frequencies(1e-4, 1.0, &c);
    let (large, _) = two_site_frequencies(1e2, 1.0, &c);
    assert!(small < 1e-3 && large > 1e3);
}

#[test]
fn solver_roots_survive_doubled_digits() {
    let c = ctx();
    let fine = c.doubled();
    let m = ModelParams::dnls(1.0, 0.0).unwrap();
    for psi0 in [0.5, 1.0, 1.3] {
        for r in find_stationary_obc(&m, psi0, 4, &ScanGrid::real_window(-1.0, 4.0).unwrap(), &c).unwrap() {
            let again = residual_at(&m, psi0, &r.omega.at(&fine), 4, &fine).unwrap();
            // located to the coarse tolerance; recomputing with more digits must not lose it
            assert!(again < c.tolerance(), "psi0={psi0} omega={}", r.omega);
        }
    }
}

#[test]
fn root_sets_stable_under_finer_grid() {
    let c = ctx();
    let m = ModelParams::dnls(1.0, 0.0).unwrap();
    let coarse = ScanGrid::real_window(0.0, 3.0).unwrap();
    let fine = ScanGrid::real(Axis::new(0.0, 3.0, 2 * coarse.omega_re.points - 1).unwrap());
    let tol = c.merge_tolerance().to_f64();
    for psi0 in [0.5, 1.0] {
        let a = find_stationary_obc(&m, psi0, 3, &coarse, &c).unwrap();
        let b = find_stationary_obc(&m, psi0, 3, &fine, &c).unwrap();
        assert_eq!(a.len(), b.len(), "psi0={psi0}");
        for (x, y) in a.iter().zip(&b) {
            assert!((x.omega_f64().0 - y.omega_f64().0).abs() < tol);
            assert_eq!(x.support, y.support);
        }
    }
}

#[test]
fn short_support_roots_solve_longer_chains() {
    let c = ctx();
    let m = ModelParams::dnls(1.0, 0.0).unwrap();
    let short = find_stationary_obc(&m, 1.0, 2, &ScanGrid::real_window(0.0, 3.0).unwrap(), &c).unwrap();
    let long = find_stationary_obc(&m, 1.0, 5, &ScanGrid::real_window(0.0, 3.0).unwrap(), &c).unwrap();
    let tol = c.merge_tolerance().to_f64();
    for r in short {
        let w = r.omega_f64().0;
        let hits: Vec<_> = long.iter().filter(|x| (x.omega_f64().0 - w).abs() < tol).collect();
        assert_eq!(hits.len(), 1, "omega={w}");
        assert_eq!(hits[0].support, r.support);
        assert!(residual_at(&m, 1.0, &r.omega, 8, &c).unwrap() < c.tolerance());
    }
}

#[test]
fn counts_are_powers_of_three() {
    for sites in 2..=4 {
        assert_eq!(count_solutions_small(sites, 1.0, 1.0).unwrap().total, 3usize.pow(sites as u32 - 1));
    }
}

#[test]
fn band_interior_and_exterior_probes() {
    let c = ctx();
    for psi0 in [0.3, 0.8] {
        let m = ModelParams::dnls(1.0, 0.0).unwrap();
        let b = dnls_real_band(1.0, psi0, 0.0, None).unwrap();
        for i in 1..=20 {
            let w = b.lo + b.width() * i as f64 / 21.0;
            let v = verify_band_edge(&m, psi0, &ComplexAmp::real_f64(w, &c), default_probe_len(&c), &c).unwrap();
            assert_eq!(v.classification, BandClass::InBandDecay, "psi0={psi0} w={w}");
            assert_eq!(v.peak_site, 0, "psi0={psi0} w={w}");
        }
        for i in 0..10 {
            let off = 0.011 + 0.1 * i as f64;
            let w = if i % 2 == 0 { b.hi + off } else { b.lo - off };
            let v = verify_band_edge(&m, psi0, &ComplexAmp::real_f64(w, &c), default_probe_len(&c), &c).unwrap();
            assert_eq!(v.classification, BandClass::OutOfBandDivergence, "psi0={psi0} w={w}");
        }
    }
}

#[test]
fn al_band_edges_straddle() {
    let c = ctx();
    for gamma in [0.0, 0.2, 0.5] {
        let m = ModelParams::al(1.0, gamma).unwrap();
        let edge = al_semi_infinite_band(gamma).hi;
        for sign in [1.0, -1.0] {
            let probe = |w: f64| {
                verify_band_edge(&m, 1.0, &ComplexAmp::real_f64(w, &c), default_probe_len(&c), &c)
                    .unwrap()
                    .classification
            };
            assert_eq!(probe(sign * edge * 0.99), BandClass::InBandDecay);
            assert_eq!(probe(sign * edge * 1.01), BandClass::OutOfBandDivergence);
        }
    }
}

#[test]
fn stability_robust_to_kick_size_and_digits() {
    let m = ModelParams::dnls(1.0, 0.0).unwrap();
    for psi0 in [0.5, 1.0, 2.0] {
        let c = Precision::new(60).unwrap();
        for sol in closed_form_solutions(psi0, &m, &c).unwrap().into_iter().filter(|s| s.support == 2) {
            let rec = record(&sol.omega, psi0, 2, &c);
            let classify = |delta: f64, c: &Precision| {
                perturb_growth(&m, &rec, &sol.amps, 1, Some(delta), 30, c).unwrap().classification
            };
            let base = classify(1e-20, &c);
            assert_eq!(base, classify(1e-21, &c), "psi0={psi0}");
            if base == Stability::Stable {
                assert_eq!(classify(1e-20, &c.doubled()), Stability::Stable);
            }
        }
    }
}
