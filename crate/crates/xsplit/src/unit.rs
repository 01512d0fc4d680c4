//! The modular unit `U_c` on the split-Cartan-normalizer curve: index-set
//! construction, certified evaluation of `log|U_c(tau)|`, the double-coset
//! classification of `Gamma \ Gamma(1) / Gamma_inf`, and grid verifiers for
//! the asymptotic envelopes and the two-branch dichotomy.

use crate::arith::{self, inv_mod};
use crate::constants::Constants;
use crate::qnum::{
    fundamental_domain_reduce, j_log_abs, HalfPlanePoint, QnumError, Rational, TruncationBudget,
    UnimodularMatrix,
};
use crate::siegel::{bernoulli_b2, siegel_log_abs, IndexPair, SiegelError};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UnitError {
    #[error("p = {p} is not an odd prime")]
    NotOddPrime { p: u64 },
    #[error("|z| = {z_abs} is not inside the unit disk")]
    ZOutOfUnitDisk { z_abs: f64 },
    #[error("grid point with |q| = {q_abs:e} violates |q| <= 1/p = {limit:e}")]
    GridPointOutOfRange { q_abs: f64, limit: f64 },
    #[error(transparent)]
    Siegel(#[from] SiegelError),
    #[error(transparent)]
    Qnum(#[from] QnumError),
}

/// The index set `A beta_c` of the unit `U_c = prod_{a in A beta_c} g_a^{12p}`.
#[derive(Debug, Clone)]
pub struct UnitIndexSet {
    p: u64,
    c_mod_p: u64,
    elements: Vec<IndexPair>,
}

impl UnitIndexSet {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn c_mod_p(&self) -> u64 {
        self.c_mod_p
    }

    pub fn elements(&self) -> &[IndexPair] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Builds `A beta_c` reduced into `[0,1)^2`; depends only on `c mod p`.
///
/// For `p | c` this is `{(k/p, 0)} u {(0, k/p)}`; otherwise
/// `{(k/p, 0)} u {(k/p, kb/p)}` with `bc = 1 mod p`.
pub fn build_index_set(p: u64, c: i64) -> Result<UnitIndexSet, UnitError> {
    if p < 3 || !arith::is_prime(p) {
        return Err(UnitError::NotOddPrime { p });
    }
    let pi = p as i64;
    let c_mod_p = c.rem_euclid(pi) as u64;
    let mut elements = Vec::with_capacity(2 * (p as usize - 1));
    if c_mod_p == 0 {
        for k in 1..pi {
            elements.push(IndexPair::from_parts(k, 0, pi).expect("nonzero index"));
        }
        for k in 1..pi {
            elements.push(IndexPair::from_parts(0, k, pi).expect("nonzero index"));
        }
    } else {
        let b = inv_mod(c_mod_p as i64, pi);
        for k in 1..pi {
            elements.push(IndexPair::from_parts(k, 0, pi).expect("nonzero index"));
        }
        for k in 1..pi {
            elements.push(IndexPair::from_parts(k, (k * b).rem_euclid(pi), pi).expect("nonzero index"));
        }
    }
    Ok(UnitIndexSet { p, c_mod_p, elements })
}

/// `sum_{a in set} B2(a1~)` as an exact rational: `(p-1)^2/(6p)` when
/// `p | c`, `-(p-1)/(3p)` otherwise.
pub fn b2_sum(set: &UnitIndexSet) -> Rational {
    set.elements.iter().map(|a| bernoulli_b2(a.a1())).sum()
}

/// `log|U_c(tau)| = 12p sum_{a in A beta_c} log|g_a(tau)|`.
///
/// The budget applies per Siegel factor; the aggregate absolute error is at
/// most `24 p (p-1)` times the per-factor target.
pub fn unit_log_abs(
    p: u64,
    c: i64,
    tau: &HalfPlanePoint,
    budget: &TruncationBudget,
) -> Result<f64, UnitError> {
    let set = build_index_set(p, c)?;
    let mut sum = 0.0;
    for a in set.elements() {
        sum += siegel_log_abs(a, tau, budget)?;
    }
    Ok(12.0 * p as f64 * sum)
}

/// `sum_{k=1}^{n} log|1 - z^k|` for `|z| < 1`.
pub fn sum_log_one_minus_powers(z: Complex64, n: u64) -> Result<f64, UnitError> {
    let r = z.norm();
    if r >= 1.0 {
        return Err(UnitError::ZOutOfUnitDisk { z_abs: r });
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let one = Complex64::new(1.0, 0.0);
    let mut zk = one;
    let mut rk = 1.0f64;
    let mut acc = 0.0;
    for _ in 1..=n {
        zk *= z;
        rk *= r;
        acc += (one - zk).norm().ln();
        // remaining terms are bounded by r^{k+1}/(1-r)^2
        if rk * r / ((1.0 - r) * (1.0 - r)) < 1e-16 {
            break;
        }
    }
    Ok(acc)
}

fn mat_mod_p(m: &UnimodularMatrix, p: i64) -> [i64; 4] {
    [m.a.rem_euclid(p), m.b.rem_euclid(p), m.c.rem_euclid(p), m.d.rem_euclid(p)]
}

fn mat_mul_mod(x: &[i64; 4], y: &[i64; 4], p: i64) -> [i64; 4] {
    [
        (x[0] * y[0] + x[1] * y[2]).rem_euclid(p),
        (x[0] * y[1] + x[1] * y[3]).rem_euclid(p),
        (x[2] * y[0] + x[3] * y[2]).rem_euclid(p),
        (x[2] * y[1] + x[3] * y[3]).rem_euclid(p),
    ]
}

/// Diagonal or anti-diagonal mod p: the image of `Gamma` in `SL2(F_p)`.
fn in_diagonal_normalizer(m: &[i64; 4]) -> bool {
    (m[1] == 0 && m[2] == 0) || (m[0] == 0 && m[3] == 0)
}

/// The unique `c` in `{0, ..., (p-1)/2}` with `beta` in
/// `Gamma beta_c Gamma_inf`, found by exhaustive search over the double
/// coset: `c` and the translation exponent `n mod p`. Since `-I` lies in
/// the normalizer, the sign of the `Gamma_inf` factor needs no separate
/// loop.
pub fn double_coset_class(beta: &UnimodularMatrix, p: u64) -> Result<u64, UnitError> {
    if p < 3 || !arith::is_prime(p) {
        return Err(UnitError::NotOddPrime { p });
    }
    let pi = p as i64;
    let beta_p = mat_mod_p(beta, pi);
    let mut found: Option<u64> = None;
    for c in 0..=(pi - 1) / 2 {
        // beta_c^{-1} = [[1,0],[-c,1]]
        let beta_c_inv = [1i64, 0, (-c).rem_euclid(pi), 1];
        let mut hit = false;
        for n in 0..pi {
            // kappa^{-1} = T^{-n}
            let t_inv = [1i64, (-n).rem_euclid(pi), 0, 1];
            let gamma = mat_mul_mod(&mat_mul_mod(&beta_p, &t_inv, pi), &beta_c_inv, pi);
            if in_diagonal_normalizer(&gamma) {
                hit = true;
                break;
            }
        }
        if hit {
            assert!(found.is_none(), "double coset class not unique for p = {p}");
            found = Some(c as u64);
        }
    }
    Ok(found.expect("every SL2(Z) matrix lies in some double coset"))
}

/// The lower unimodular matrix `beta_c = [[1,0],[c,1]]`.
pub fn beta_matrix(c: i64) -> UnimodularMatrix {
    UnimodularMatrix::new(1, 0, c, 1).expect("beta_c is unimodular")
}

/// One grid point of the envelope verification for `log|U_c|`.
#[derive(Debug, Clone, Serialize)]
pub struct UnitEvalReport {
    pub p: u64,
    pub c: i64,
    pub tau_re: f64,
    pub tau_im: f64,
    pub log_q_abs: f64,
    pub log_abs_u: f64,
    pub main_term: f64,
    pub envelope: f64,
    pub residual: f64,
    pub slack_normalizer: f64,
    pub pass: bool,
}

/// Checks `|log|U_c(tau)| - main| <= envelope + slack * normalizer` on each
/// grid point, with the `p | c` / `p !| c` case split on main term and
/// envelope.
pub fn verify_prop_pu(
    p: u64,
    c: i64,
    grid: &[HalfPlanePoint],
    budget: &TruncationBudget,
    constants: &Constants,
) -> Result<Vec<UnitEvalReport>, UnitError> {
    let set = build_index_set(p, c)?;
    let pf = p as f64;
    let p_divides_c = set.c_mod_p() == 0;
    let mut out = Vec::with_capacity(grid.len());
    for tau in grid {
        let q_abs = tau.q_abs();
        if q_abs > (1.0 / pf) * (1.0 + 1e-9) {
            return Err(UnitError::GridPointOutOfRange { q_abs, limit: 1.0 / pf });
        }
        let log_q = tau.log_q_abs();
        let log_u = unit_log_abs(p, c, tau, budget)?;
        let (main, envelope, normalizer, slack) = if p_divides_c {
            (
                (pf - 1.0) * (pf - 1.0) * log_q,
                4.0 * PI * PI * pf * pf / (-log_q),
                pf * pf.ln(),
                constants.s1,
            )
        } else {
            (
                -2.0 * (pf - 1.0) * log_q,
                8.0 * PI * PI * pf * pf / (-log_q),
                pf,
                constants.s2,
            )
        };
        let residual = log_u - main;
        let pass = residual.abs() <= envelope + slack * normalizer;
        out.push(UnitEvalReport {
            p,
            c,
            tau_re: tau.x(),
            tau_im: tau.y(),
            log_q_abs: log_q,
            log_abs_u: log_u,
            main_term: main,
            envelope,
            residual,
            slack_normalizer: normalizer,
            pass,
        });
    }
    Ok(out)
}

/// Which branch of the dichotomy held at a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PanaBranch {
    /// `log|j| <= 2 pi sqrt(p) + 6 log p + C + slack` directly.
    Archimedean,
    /// `log|j| <= |log|U_c||/(2(p-1)) + 2 pi sqrt(p) - 6 log p + C + slack`.
    UnitBound,
    Neither,
}

#[derive(Debug, Clone, Serialize)]
pub struct PanaVerdict {
    pub p: u64,
    pub c: u64,
    pub tau_re: f64,
    pub tau_im: f64,
    pub log_j_abs: f64,
    pub log_u_abs: Option<f64>,
    pub branch: PanaBranch,
    pub pass: bool,
}

/// Checks that every `(tau, c)` pair satisfies at least one branch of the
/// dichotomy. Grid points are reduced into the fundamental domain first.
pub fn verify_prop_pana(
    p: u64,
    grid: &[HalfPlanePoint],
    c_runge: f64,
    budget: &TruncationBudget,
    constants: &Constants,
) -> Result<Vec<PanaVerdict>, UnitError> {
    if p < 3 || !arith::is_prime(p) {
        return Err(UnitError::NotOddPrime { p });
    }
    let pf = p as f64;
    let direct_bound = 2.0 * PI * pf.sqrt() + 6.0 * pf.ln() + c_runge + constants.pana_slack;
    let mut out = Vec::new();
    for tau0 in grid {
        let (tau, _) = fundamental_domain_reduce(tau0);
        let log_j = j_log_abs(&tau, budget)?;
        for c in 0..=(p - 1) / 2 {
            let (branch, log_u) = if log_j <= direct_bound {
                (PanaBranch::Archimedean, None)
            } else {
                let u = unit_log_abs(p, c as i64, &tau, budget)?;
                let unit_bound = u.abs() / (2.0 * (pf - 1.0)) + 2.0 * PI * pf.sqrt()
                    - 6.0 * pf.ln()
                    + c_runge
                    + constants.pana_slack;
                if log_j <= unit_bound {
                    (PanaBranch::UnitBound, Some(u))
                } else {
                    (PanaBranch::Neither, Some(u))
                }
            };
            out.push(PanaVerdict {
                p,
                c,
                tau_re: tau.x(),
                tau_im: tau.y(),
                log_j_abs: log_j,
                log_u_abs: log_u,
                branch,
                pass: branch != PanaBranch::Neither,
            });
        }
    }
    Ok(out)
}

/// Geometric `y`-ladder from the `|q| = 1/p` precondition boundary into the
/// deep-cusp regime, crossed with off-axis real parts.
pub fn default_pu_grid(p: u64) -> Vec<HalfPlanePoint> {
    let pf = p as f64;
    let y0 = pf.ln() / (2.0 * PI) * (1.0 + 1e-9);
    let y_max = 3.0 * pf.sqrt();
    let mut grid = Vec::new();
    for &x in &[0.0, 1.0 / 3.0, 0.5] {
        let mut y = y0;
        loop {
            grid.push(HalfPlanePoint::new(x, y).expect("y > 0"));
            if y > y_max {
                break;
            }
            y *= 1.3;
        }
    }
    grid
}

/// Fundamental-domain ladder for the dichotomy check, from the corner of
/// the domain out past `y = 6 sqrt(p)`.
pub fn default_pana_grid(p: u64) -> Vec<HalfPlanePoint> {
    let y_max = 6.0 * (p as f64).sqrt();
    let mut grid = Vec::new();
    for &x in &[0.0, 1.0 / 3.0, 0.5] {
        let mut y = 0.9;
        loop {
            grid.push(HalfPlanePoint::new(x, y).expect("y > 0"));
            if y > y_max {
                break;
            }
            y *= 1.35;
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn index_set_p5_c0() {
        let set = build_index_set(5, 0).unwrap();
        assert_eq!(set.len(), 8);
        let expect: BTreeSet<IndexPair> = (1..5)
            .flat_map(|k| {
                [IndexPair::from_parts(k, 0, 5).unwrap(), IndexPair::from_parts(0, k, 5).unwrap()]
            })
            .collect();
        let got: BTreeSet<IndexPair> = set.elements().iter().copied().collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn index_set_p5_c2() {
        // 3 * 2 = 1 mod 5, so the second family is (k/5, 3k/5)
        let set = build_index_set(5, 2).unwrap();
        let expect: BTreeSet<IndexPair> = (1..5i64)
            .flat_map(|k| {
                [
                    IndexPair::from_parts(k, 0, 5).unwrap(),
                    IndexPair::from_parts(k, (3 * k).rem_euclid(5), 5).unwrap(),
                ]
            })
            .collect();
        let got: BTreeSet<IndexPair> = set.elements().iter().copied().collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn index_set_depends_only_on_c_mod_p() {
        let a: BTreeSet<IndexPair> = build_index_set(5, 2).unwrap().elements().iter().copied().collect();
        let b: BTreeSet<IndexPair> = build_index_set(5, 7).unwrap().elements().iter().copied().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn index_set_closed_under_negation() {
        for c in [0i64, 1, 3] {
            let set = build_index_set(11, c).unwrap();
            let all: BTreeSet<IndexPair> = set.elements().iter().copied().collect();
            for a in set.elements() {
                assert!(all.contains(&a.neg()), "missing -{a:?} for c = {c}");
            }
        }
    }

    #[test]
    fn rejects_non_prime() {
        assert!(build_index_set(9, 0).is_err());
        assert!(build_index_set(2, 0).is_err());
    }

    #[test]
    fn b2_sum_closed_forms() {
        assert_eq!(b2_sum(&build_index_set(5, 0).unwrap()), Rational::new(8, 15));
        assert_eq!(b2_sum(&build_index_set(5, 1).unwrap()), Rational::new(-4, 15));
        assert_eq!(b2_sum(&build_index_set(3, 0).unwrap()), Rational::new(2, 9));
    }

    #[test]
    fn sum_log_one_minus_powers_single_term() {
        let v = sum_log_one_minus_powers(Complex64::new(0.5, 0.0), 1).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sum_log_one_minus_powers_zero() {
        assert_eq!(sum_log_one_minus_powers(Complex64::new(0.0, 0.0), 100).unwrap(), 0.0);
        assert!(sum_log_one_minus_powers(Complex64::new(1.0, 0.0), 1).is_err());
    }

    #[test]
    fn unit_log_abs_c_mod_p() {
        let tau = HalfPlanePoint::new(0.2, 1.1).unwrap();
        let b = TruncationBudget::default();
        let v0 = unit_log_abs(5, 0, &tau, &b).unwrap();
        let v5 = unit_log_abs(5, 5, &tau, &b).unwrap();
        assert_eq!(v0, v5);
    }

    #[test]
    fn unit_main_term_slope_p5() {
        // at tau = 5i the deviation from the main term stays inside the
        // envelope + slack of the proposition
        let tau = HalfPlanePoint::new(0.0, 5.0).unwrap();
        let b = TruncationBudget::default();
        let log_q = tau.log_q_abs();

        let v = unit_log_abs(5, 0, &tau, &b).unwrap();
        let dev = (v - 16.0 * log_q).abs();
        assert!(dev <= 4.0 * PI * PI * 25.0 / (10.0 * PI) + 16.0 * 5.0 * 5.0f64.ln(), "dev {dev}");

        let v = unit_log_abs(5, 1, &tau, &b).unwrap();
        let dev = (v - (-8.0) * log_q).abs();
        assert!(dev <= 8.0 * PI * PI * 25.0 / (10.0 * PI) + 20.0 * 5.0, "dev {dev}");
    }

    #[test]
    fn double_coset_representatives_map_to_themselves() {
        assert_eq!(double_coset_class(&beta_matrix(3), 11).unwrap(), 3);
        assert_eq!(double_coset_class(&UnimodularMatrix::identity(), 7).unwrap(), 0);
    }

    #[test]
    fn double_coset_round_trip() {
        // beta = gamma * beta_c * T^n with gamma in Gamma must recover c
        let p = 13u64;
        for (c, n, g) in [
            (2i64, 3i64, UnimodularMatrix::new(1, 0, 13, 1).unwrap()),
            (4, -2, UnimodularMatrix::new(-1, 0, 0, -1).unwrap()),
            // anti-diagonal mod 13: det = 169 - 168 = 1
            (0, 5, UnimodularMatrix::new(13, 12, 14, 13).unwrap()),
        ] {
            let beta = g.mul(&beta_matrix(c)).mul(&UnimodularMatrix::translation(n));
            assert_eq!(double_coset_class(&beta, p).unwrap(), c as u64, "c={c} n={n}");
        }
    }

    #[test]
    fn pu_default_grid_respects_precondition() {
        for p in [5u64, 11, 47] {
            for tau in default_pu_grid(p) {
                assert!(tau.q_abs() <= (1.0 / p as f64) * (1.0 + 1e-8));
            }
        }
    }

    #[test]
    fn pana_small_point_uses_archimedean_branch() {
        let c = Constants::default();
        let grid = [HalfPlanePoint::new(0.0, 1.0).unwrap()];
        let verdicts =
            verify_prop_pana(11, &grid, 10.0, &TruncationBudget::default(), &c).unwrap();
        assert_eq!(verdicts.len(), 6);
        for v in &verdicts {
            assert_eq!(v.branch, PanaBranch::Archimedean);
        }
    }

    #[test]
    fn pana_deep_point_uses_unit_branch() {
        let c = Constants::default();
        let grid = [HalfPlanePoint::new(0.0, 40.0).unwrap()];
        let verdicts =
            verify_prop_pana(11, &grid, 10.0, &TruncationBudget::default(), &c).unwrap();
        for v in &verdicts {
            assert!(v.pass);
            assert_eq!(v.branch, PanaBranch::UnitBound, "c = {}", v.c);
        }
    }
}
