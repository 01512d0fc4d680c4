//! Exact index algebra on `(N^-1 Z/Z)^2` and certified evaluation of
//! `log|g_a(tau)|` through the infinite product
//!
//! `log|g_a| = (B2(a1)/2) log|q|
//!             + sum_{n>=0} log|1 - q^{n+a1} e^{2 pi i a2}|
//!             + log|1 - q^{n+1-a1} e^{-2 pi i a2}|`.
//!
//! Only log-moduli are computed; the root-of-unity phases in the
//! transformation laws never enter any modulus identity.

use crate::qnum::{q_pow, HalfPlanePoint, QnumError, Rational, TruncationBudget, UnimodularMatrix};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SiegelError {
    #[error("index (a1, a2) must not be integral")]
    IntegralIndex,
    #[error("pga residual requires |q| <= 0.1, got {q_abs}")]
    QOutOfRange { q_abs: f64 },
    #[error(transparent)]
    Qnum(#[from] QnumError),
}

/// A nonzero class `a = (a1, a2)` in `(Q/Z)^2`, held as exact rationals in
/// `[0,1)` over a canonical common denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexPair {
    n1: i64,
    n2: i64,
    den: i64,
}

impl IndexPair {
    /// Builds the class of `(a1, a2)` modulo `Z^2`. Fails when both entries
    /// are integral.
    pub fn new(a1: Rational, a2: Rational) -> Result<Self, SiegelError> {
        let r1 = reduce_mod_one(a1);
        let r2 = reduce_mod_one(a2);
        if r1.is_zero() && r2.is_zero() {
            return Err(SiegelError::IntegralIndex);
        }
        let den = r1.denom().lcm(r2.denom());
        let n1 = r1.numer() * (den / r1.denom());
        let n2 = r2.numer() * (den / r2.denom());
        Ok(IndexPair { n1, n2, den })
    }

    /// Convenience constructor from numerators over a common denominator.
    pub fn from_parts(n1: i64, n2: i64, den: i64) -> Result<Self, SiegelError> {
        Self::new(Rational::new(n1, den), Rational::new(n2, den))
    }

    /// `a1` as an exact rational in `[0,1)` (the lifting of the class).
    pub fn a1(&self) -> Rational {
        Rational::new(self.n1, self.den)
    }

    pub fn a2(&self) -> Rational {
        Rational::new(self.n2, self.den)
    }

    /// Canonical common denominator of the reduced class.
    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn neg(&self) -> IndexPair {
        IndexPair {
            n1: if self.n1 == 0 { 0 } else { self.den - self.n1 },
            n2: if self.n2 == 0 { 0 } else { self.den - self.n2 },
            den: self.den,
        }
    }
}

/// Every nonzero class in `(Q/Z)^2` whose canonical denominator is at most
/// `den_max`, sorted.
pub fn index_classes_up_to(den_max: i64) -> Vec<IndexPair> {
    let mut set = std::collections::BTreeSet::new();
    for den in 2..=den_max {
        for n1 in 0..den {
            for n2 in 0..den {
                if n1 == 0 && n2 == 0 {
                    continue;
                }
                set.insert(IndexPair::from_parts(n1, n2, den).unwrap());
            }
        }
    }
    set.into_iter().collect()
}

fn reduce_mod_one(r: Rational) -> Rational {
    let f = r.floor();
    r - f
}

/// The second Bernoulli polynomial `B2(t) = t^2 - t + 1/6`, exact.
pub fn bernoulli_b2(t: Rational) -> Rational {
    t * t - t + Rational::new(1, 6)
}

/// Right action of `gamma` on row vectors: `a -> a gamma`, reduced into
/// `[0,1)^2`.
pub fn act_on_index(a: &IndexPair, gamma: &UnimodularMatrix) -> IndexPair {
    let a1 = a.a1();
    let a2 = a.a2();
    let b1 = a1 * Rational::from(gamma.a) + a2 * Rational::from(gamma.c);
    let b2 = a1 * Rational::from(gamma.b) + a2 * Rational::from(gamma.d);
    // a gamma is integral only if a is (gamma is invertible over Z), so this
    // cannot fail for a valid IndexPair.
    IndexPair::new(b1, b2).expect("unimodular action preserves nonintegrality")
}

/// Certified evaluation of `log|g_a(tau)|`.
///
/// Truncates the product when the geometric majorant
/// `2(|q|^{n+a1} + |q|^{n+1-a1})/(1-|q|)` drops below the budget target.
pub fn siegel_log_abs(
    a: &IndexPair,
    tau: &HalfPlanePoint,
    budget: &TruncationBudget,
) -> Result<f64, SiegelError> {
    let r = tau.q_abs();
    if r > 0.99 {
        return Err(SiegelError::Qnum(QnumError::QTooLarge { q_abs: r, limit: 0.99 }));
    }
    let a1 = a.a1();
    let a1f = a1.to_f64().unwrap();
    let b2 = bernoulli_b2(a1).to_f64().unwrap();
    let mut acc = 0.5 * b2 * tau.log_q_abs();

    let q = tau.q();
    let one = Complex64::new(1.0, 0.0);
    let a2f = a.a2().to_f64().unwrap();
    let phase = Complex64::new(0.0, 2.0 * PI * a2f).exp();
    // z1_n = q^{n+a1} e^{2 pi i a2}, z2_n = q^{n+1-a1} e^{-2 pi i a2}
    let mut z1 = q_pow(tau, a1) * phase;
    let mut z2 = q_pow(tau, Rational::from(1) - a1) * phase.conj();
    let mut r1 = r.powf(a1f);
    let mut r2 = r.powf(1.0 - a1f);
    for n in 0..budget.max_terms {
        acc += (one - z1).norm().ln() + (one - z2).norm().ln();
        z1 *= q;
        z2 *= q;
        r1 *= r;
        r2 *= r;
        let tail = 2.0 * (r1 + r2) / (1.0 - r);
        if tail <= budget.target_abs_error {
            return Ok(acc);
        }
        let _ = n;
    }
    Err(SiegelError::Qnum(QnumError::BudgetExhausted {
        tail: 2.0 * (r1 + r2) / (1.0 - r),
        target: budget.target_abs_error,
        terms: budget.max_terms,
    }))
}

/// `log|g_a(tau)|` minus its three-term principal part
/// `(B2(a1)/2) log|q| + log|1-q^{a1}e^{2 pi i a2}| + log|1-q^{1-a1}e^{-2 pi i a2}|`.
///
/// Requires `|q| <= 0.1`; the result is `O(|q|)`.
pub fn pga_residual(a: &IndexPair, tau: &HalfPlanePoint) -> Result<f64, SiegelError> {
    let r = tau.q_abs();
    if r > 0.1 {
        return Err(SiegelError::QOutOfRange { q_abs: r });
    }
    let full = siegel_log_abs(a, tau, &TruncationBudget::default())?;
    let a1 = a.a1();
    let b2 = bernoulli_b2(a1).to_f64().unwrap();
    let a2f = a.a2().to_f64().unwrap();
    let phase = Complex64::new(0.0, 2.0 * PI * a2f).exp();
    let one = Complex64::new(1.0, 0.0);
    let z1 = q_pow(tau, a1) * phase;
    let z2 = q_pow(tau, Rational::from(1) - a1) * phase.conj();
    let main = 0.5 * b2 * tau.log_q_abs() + (one - z1).norm().ln() + (one - z2).norm().ln();
    Ok(full - main)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(x: f64, y: f64) -> HalfPlanePoint {
        HalfPlanePoint::new(x, y).unwrap()
    }

    #[test]
    fn rejects_integral_index() {
        assert!(IndexPair::new(Rational::from(0), Rational::from(3)).is_err());
        assert!(IndexPair::from_parts(5, 0, 5).is_err());
    }

    #[test]
    fn canonical_reduction() {
        let a = IndexPair::from_parts(2, 0, 4).unwrap();
        let b = IndexPair::from_parts(1, 0, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.den(), 2);
        // representatives differing by Z^2 give the same class
        let c = IndexPair::new(Rational::new(7, 2), Rational::new(-3, 1)).unwrap();
        assert_eq!(c, b);
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli_b2(Rational::new(0, 1)), Rational::new(1, 6));
        assert_eq!(bernoulli_b2(Rational::new(1, 2)), Rational::new(-1, 12));
        let sum: Rational = (1..5).map(|k| bernoulli_b2(Rational::new(k, 5))).sum();
        assert_eq!(sum, Rational::new(-2, 15));
    }

    #[test]
    fn act_examples() {
        let s = UnimodularMatrix::inversion();
        let a = IndexPair::from_parts(1, 0, 2).unwrap();
        assert_eq!(act_on_index(&a, &s), IndexPair::from_parts(0, 1, 2).unwrap());

        let t = UnimodularMatrix::translation(1);
        let b = IndexPair::from_parts(1, 0, 5).unwrap();
        assert_eq!(act_on_index(&b, &t), IndexPair::from_parts(1, 1, 5).unwrap());

        let id = UnimodularMatrix::identity();
        let c = IndexPair::from_parts(0, 3, 7).unwrap();
        assert_eq!(act_on_index(&c, &id), c);
    }

    #[test]
    fn siegel_values_at_2i() {
        // frozen from a high-truncation mpmath oracle
        let b = TruncationBudget::default();
        let tau = hp(0.0, 2.0);
        let a = IndexPair::from_parts(1, 0, 2).unwrap();
        let v = siegel_log_abs(&a, &tau, &b).unwrap();
        assert!((v - 0.5198603854199590).abs() < 1e-12, "got {v}");

        let a = IndexPair::from_parts(0, 1, 2).unwrap();
        let v = siegel_log_abs(&a, &tau, &b).unwrap();
        assert!((v - (-0.3540433959397783)).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn transformation_law_under_inversion() {
        // g_(1/2,0) at i/2 vs g_(0,1/2) at 2i
        let b = TruncationBudget::default();
        let lhs = siegel_log_abs(&IndexPair::from_parts(1, 0, 2).unwrap(), &hp(0.0, 0.5), &b).unwrap();
        let rhs = siegel_log_abs(&IndexPair::from_parts(0, 1, 2).unwrap(), &hp(0.0, 2.0), &b).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn negation_symmetry() {
        let b = TruncationBudget::default();
        let tau = hp(0.21, 1.3);
        for (n1, n2, den) in [(1, 3, 7), (2, 0, 5), (0, 4, 11), (5, 8, 13)] {
            let a = IndexPair::from_parts(n1, n2, den).unwrap();
            let va = siegel_log_abs(&a, &tau, &b).unwrap();
            let vn = siegel_log_abs(&a.neg(), &tau, &b).unwrap();
            assert!((va - vn).abs() < 1e-10, "({n1},{n2})/{den}: {va} vs {vn}");
        }
    }

    #[test]
    fn pga_residual_small_at_deep_cusp() {
        let a = IndexPair::from_parts(1, 2, 3).unwrap();
        let tau = hp(0.0, 3.0);
        let res = pga_residual(&a, &tau).unwrap();
        assert!(res.abs() <= 10.0 * (-6.0 * PI).exp(), "residual {res}");
    }

    #[test]
    fn pga_residual_rejects_large_q() {
        let a = IndexPair::from_parts(1, 0, 2).unwrap();
        let tau = hp(0.0, 0.2);
        assert!(matches!(pga_residual(&a, &tau), Err(SiegelError::QOutOfRange { .. })));
    }
}
