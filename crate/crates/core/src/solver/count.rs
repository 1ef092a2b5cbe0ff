//! Exhaustive solution count for very short chains.
//!
//! At `γ = 0` with real `ψ₀` the DNLS chain factorises as `ψ_k = ψ_{k−1} q_k(ω)` with
//! `q_k = ω − g ψ_{k−1}²`, so the stationary frequencies with support `k` are exactly the
//! roots of `q_k` that do not already zero `ψ_{k−1}`. `deg q_1 = 1` and
//! `deg q_k = 2·3^{k−2}`; all roots are found with the Aberth–Ehrlich iteration.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexAmp, Precision};

const MAX_ABERTH_ITER: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountedRoot {
    pub omega_re: f64,
    pub omega_im: f64,
    pub support: usize,
    /// Number of Aberth approximants that merged into this root.
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionCount {
    pub total: usize,
    /// `by_support[k - 1]` distinct solutions occupying exactly `k` sites.
    pub by_support: Vec<usize>,
    pub roots: Vec<CountedRoot>,
}

impl SolutionCount {
    /// Roots whose factor has a repeated zero.
    pub fn repeated(&self) -> usize {
        self.roots.iter().filter(|r| r.multiplicity > 1).count()
    }
}

/// Real-coefficient polynomial, lowest degree first.
#[derive(Clone, Debug)]
struct Poly(Vec<Float>);

impl Poly {
    fn degree(&self) -> usize {
        self.0.len() - 1
    }

    fn mul(&self, rhs: &Poly, bits: u32) -> Poly {
        let mut out = vec![Float::new(bits); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += Float::with_val(bits, a * b);
            }
        }
        Poly(out)
    }

    /// `ω − g p²`.
    fn shifted_square(&self, g: f64, bits: u32) -> Poly {
        let mut sq = self.mul(self, bits);
        for c in &mut sq.0 {
            *c *= -g;
        }
        if sq.0.len() < 2 {
            sq.0.resize(2, Float::new(bits));
        }
        sq.0[1] += 1;
        sq
    }

    /// `p(z)` and `p′(z)` by Horner's rule.
    fn eval(&self, z: &ComplexAmp) -> (ComplexAmp, ComplexAmp) {
        let bits = z.prec();
        let mut p = ComplexAmp::new(Float::new(bits), Float::new(bits));
        let mut dp = p.clone();
        for c in self.0.iter().rev() {
            dp = &(&dp * z) + &p;
            p = &p * z;
            p = ComplexAmp::new(Float::with_val(bits, p.re() + c), p.im().clone());
        }
        (p, dp)
    }
}

fn aberth(poly: &Poly, ctx: &Precision) -> Result<Vec<ComplexAmp>> {
    let d = poly.degree();
    let bits = ctx.bits();
    let lead = poly.0[d].clone();
    if lead.is_zero() {
        return Err(Error::DegenerateInput("leading coefficient vanished".into()));
    }
    // geometric mean of the root moduli
    let constant = Float::with_val(bits, &poly.0[0] / &lead).abs();
    let radius = if constant.is_zero() {
        ctx.float(1.0)
    } else {
        Float::with_val(bits, constant.ln() / d as f64).exp()
    };
    let two_pi = Float::with_val(bits, ctx.pi() * 2u32);
    let mut z: Vec<ComplexAmp> = (0..d)
        .map(|k| {
            let theta = Float::with_val(bits, &two_pi * ((k as f64 + 0.25) / d as f64)) + 0.4;
            ComplexAmp::from_polar(&radius, &theta)
        })
        .collect();
    let eps = ctx.pow10(-f64::from(ctx.digits()) / 2.0);
    let one = ComplexAmp::real(ctx.float(1.0));
    for _ in 0..MAX_ABERTH_ITER {
        let mut largest = ctx.zero();
        for k in 0..d {
            let (p, dp) = poly.eval(&z[k]);
            if p.is_zero() {
                continue;
            }
            let ratio = p.div(&dp);
            let mut sum = ComplexAmp::zero(ctx);
            for (j, zj) in z.iter().enumerate() {
                if j != k {
                    sum = &sum + &one.div(&(&z[k] - zj));
                }
            }
            let w = ratio.div(&(&one - &(&ratio * &sum)));
            if !w.is_finite() {
                continue;
            }
            let mut scale = z[k].abs();
            if scale < 1 {
                scale = ctx.float(1.0);
            }
            let rel = Float::with_val(bits, w.abs() / &scale);
            if rel > largest {
                largest = rel;
            }
            z[k] = &z[k] - &w;
        }
        if largest < eps {
            return Ok(z);
        }
    }
    Err(Error::Indeterminate(format!("Aberth iteration did not settle for degree {d}")))
}

/// Number of stationary open-boundary solutions of the `γ = 0` DNLS chain occupying at
/// most `n_sites` sites, with the per-support breakdown.
///
/// Complex `ω` roots of each support factor are counted once per distinct value; repeated
/// zeros are reported through [`CountedRoot::multiplicity`].
pub fn count_solutions_small(n_sites: usize, g: f64, psi0_mag: f64) -> Result<SolutionCount> {
    if !(2..=5).contains(&n_sites) {
        return Err(Error::UnsupportedSize(format!("solution count supports 2..=5 sites, got {n_sites}")));
    }
    if !(g > 0.0) || !g.is_finite() || !(psi0_mag > 0.0) || !psi0_mag.is_finite() {
        return Err(Error::DegenerateInput(format!("need g > 0 and psi0 > 0, got g={g}, psi0={psi0_mag}")));
    }
    let ctx = Precision::new(40 + 20 * n_sites as u32)?;
    let bits = ctx.bits();
    let merge = ctx.merge_tolerance();

    let mut prefix = Poly(vec![ctx.float(psi0_mag)]);
    let mut by_support = Vec::with_capacity(n_sites);
    let mut roots = Vec::new();
    for support in 1..=n_sites {
        let factor = prefix.shifted_square(g, bits);
        let mut distinct: Vec<(ComplexAmp, usize)> = Vec::new();
        for z in aberth(&factor, &ctx)? {
            // zeros of the prefix belong to a shorter support
            let (p, _) = prefix.eval(&z);
            if p.abs() < merge {
                continue;
            }
            match distinct.iter_mut().find(|(w, _)| (&z - w).abs() < merge) {
                Some((_, m)) => *m += 1,
                None => distinct.push((z, 1)),
            }
        }
        by_support.push(distinct.len());
        for (z, multiplicity) in distinct {
            let (omega_re, mut omega_im) = z.to_f64_pair();
            if z.im().clone().abs() < merge {
                omega_im = 0.0;
            }
            roots.push(CountedRoot { omega_re, omega_im, support, multiplicity });
        }
        prefix = prefix.mul(&factor, bits);
    }
    roots.sort_by(|a, b| {
        a.support
            .cmp(&b.support)
            .then(a.omega_re.total_cmp(&b.omega_re))
            .then(a.omega_im.total_cmp(&b.omega_im))
    });
    Ok(SolutionCount { total: by_support.iter().sum(), by_support, roots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_are_powers_of_three() {
        for (sites, total) in [(2, 3), (3, 9), (4, 27)] {
            let c = count_solutions_small(sites, 1.0, 1.0).unwrap();
            assert_eq!(c.total, total);
            assert_eq!(c.repeated(), 0);
        }
        let c = count_solutions_small(3, 1.0, 1.0).unwrap();
        assert_eq!(c.by_support, vec![1, 2, 6]);
    }

    #[test]
    fn two_site_roots_are_the_closed_forms() {
        let c = count_solutions_small(2, 1.0, 1.0).unwrap();
        let s5 = 5f64.sqrt();
        let want = [(1, 1.0), (2, (3.0 - s5) / 2.0), (2, (3.0 + s5) / 2.0)];
        for (root, (support, w)) in c.roots.iter().zip(want) {
            assert_eq!(root.support, support);
            assert!((root.omega_re - w).abs() < 1e-14 && root.omega_im.abs() < 1e-14);
        }
    }

    #[test]
    fn three_site_sextic_roots() {
        let c = count_solutions_small(3, 1.0, 1.0).unwrap();
        let six: Vec<_> = c.roots.iter().filter(|r| r.support == 3).collect();
        assert!((six[0].omega_re - 0.1747).abs() < 1e-4 && six[0].omega_im.abs() < 1e-12);
        assert!((six[5].omega_re - 2.9588).abs() < 1e-4);
        // real coefficients: conjugate pairs
        let im_sum: f64 = six.iter().map(|r| r.omega_im).sum();
        assert!(im_sum.abs() < 1e-12);
    }

    #[test]
    fn five_sites() {
        let c = count_solutions_small(5, 0.7, 1.3).unwrap();
        assert_eq!(c.by_support, vec![1, 2, 6, 18, 54]);
    }

    #[test]
    fn size_guard() {
        assert!(matches!(count_solutions_small(1, 1.0, 1.0), Err(Error::UnsupportedSize(_))));
        assert!(matches!(count_solutions_small(6, 1.0, 1.0), Err(Error::UnsupportedSize(_))));
        assert!(count_solutions_small(3, 0.0, 1.0).is_err());
    }
}
