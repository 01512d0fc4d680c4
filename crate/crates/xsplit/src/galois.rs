//! Elliptic-curve arithmetic over prime fields: exhaustive point counting,
//! Frobenius traces, the split-Cartan-normalizer compatibility test, and
//! the class-number-one CM data used by the consistency checks.

use crate::arith::{is_prime, legendre, pow_mod};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GaloisError {
    #[error("curve is singular (discriminant = 0)")]
    SingularCurve,
    #[error("ell = {ell} is not prime")]
    NotPrime { ell: u64 },
    #[error("bad reduction at ell = {ell}")]
    BadReduction { ell: u64 },
    #[error("the compatibility test is undecidable at ell = p = {p}")]
    EllEqualsP { p: u64 },
    #[error("j = 0 and j = 1728 require their special models")]
    SpecialJ,
}

/// A long Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`
/// with integer coefficients and nonzero discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveModel {
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
}

impl CurveModel {
    pub fn new(a1: BigInt, a2: BigInt, a3: BigInt, a4: BigInt, a6: BigInt) -> Result<Self, GaloisError> {
        let e = CurveModel { a1, a2, a3, a4, a6 };
        if e.discriminant().is_zero() {
            return Err(GaloisError::SingularCurve);
        }
        Ok(e)
    }

    pub fn from_i64(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64) -> Result<Self, GaloisError> {
        Self::new(a1.into(), a2.into(), a3.into(), a4.into(), a6.into())
    }

    /// Short form `y^2 = x^3 + Ax + B`.
    pub fn short(a: BigInt, b: BigInt) -> Result<Self, GaloisError> {
        Self::new(BigInt::zero(), BigInt::zero(), BigInt::zero(), a, b)
    }

    fn b_invariants(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        let b2 = &self.a1 * &self.a1 + 4 * &self.a2;
        let b4 = 2 * &self.a4 + &self.a1 * &self.a3;
        let b6 = &self.a3 * &self.a3 + 4 * &self.a6;
        let b8 = &self.a1 * &self.a1 * &self.a6 + 4 * &self.a2 * &self.a6
            - &self.a1 * &self.a3 * &self.a4
            + &self.a2 * &self.a3 * &self.a3
            - &self.a4 * &self.a4;
        (b2, b4, b6, b8)
    }

    pub fn discriminant(&self) -> BigInt {
        let (b2, b4, b6, b8) = self.b_invariants();
        -(&b2 * &b2) * &b8 - 8 * (&b4 * &b4 * &b4) - 27 * (&b6 * &b6) + 9 * &b2 * &b4 * &b6
    }

    /// Exact `j = c4^3 / Delta`.
    pub fn j_invariant(&self) -> BigRational {
        let (b2, b4, _, _) = self.b_invariants();
        let c4 = &b2 * &b2 - 24 * &b4;
        BigRational::new(&c4 * &c4 * &c4, self.discriminant())
    }

    pub fn has_good_reduction(&self, ell: u64) -> bool {
        !(self.discriminant() % BigInt::from(ell)).is_zero()
    }
}

/// A Frobenius trace at a good prime.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRecord {
    pub ell: u64,
    pub a_ell: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImageStatus {
    RuledOut,
    PossiblyContained,
}

/// Outcome of probing the mod-p image through Frobenius traces. Only
/// non-containment is certified (by the witness prime); containment is
/// never proved, only not refuted.
#[derive(Debug, Clone, Serialize)]
pub struct ImageVerdict {
    pub p: u64,
    pub status: ImageStatus,
    pub witness_ell: Option<u64>,
    pub traces_used: usize,
    pub bad_primes_skipped: usize,
}

fn big_mod(v: &BigInt, ell: u64) -> u64 {
    let r = v % BigInt::from(ell);
    let r = if r.is_negative() { r + BigInt::from(ell) } else { r };
    r.to_u64().unwrap()
}

/// `a_ell = ell + 1 - #E(F_ell)` by exhaustive enumeration over `x`.
///
/// For odd `ell` the substitution `y -> (y' - a1 x - a3)/2` reduces the
/// count to a quadratic-character sum against `4x^3 + b2 x^2 + 2 b4 x + b6`,
/// evaluated with a precomputed square table; `ell = 2` is counted directly.
pub fn trace_of_frobenius(e: &CurveModel, ell: u64) -> Result<i64, GaloisError> {
    if !is_prime(ell) {
        return Err(GaloisError::NotPrime { ell });
    }
    if !e.has_good_reduction(ell) {
        return Err(GaloisError::BadReduction { ell });
    }
    if ell == 2 {
        let a = [
            big_mod(&e.a1, 2),
            big_mod(&e.a2, 2),
            big_mod(&e.a3, 2),
            big_mod(&e.a4, 2),
            big_mod(&e.a6, 2),
        ];
        let mut count = 1u64; // point at infinity
        for x in 0..2u64 {
            for y in 0..2u64 {
                let lhs = (y * y + a[0] * x * y + a[2] * y) % 2;
                let rhs = (x * x * x + a[1] * x * x + a[3] * x + a[4]) % 2;
                if lhs == rhs {
                    count += 1;
                }
            }
        }
        return Ok(3 - count as i64);
    }

    let (b2, b4, b6, _) = e.b_invariants();
    let b2 = big_mod(&b2, ell);
    let two_b4 = big_mod(&(b4 * 2), ell);
    let b6 = big_mod(&b6, ell);

    // chi table: chi[v] = 1 for nonzero squares, -1 for nonsquares, 0 at 0
    let mut chi = vec![-1i64; ell as usize];
    chi[0] = 0;
    for x in 1..ell {
        chi[((x * x) % ell) as usize] = 1;
    }

    let mut sum = 0i64;
    for x in 0..ell {
        // g(x) = 4x^3 + b2 x^2 + 2 b4 x + b6
        let g = ((4 * x % ell + b2) * x % ell + two_b4) * x % ell + b6;
        sum += chi[(g % ell) as usize];
    }
    Ok(-sum)
}

/// Trace compatibility with the normalizer of a split Cartan subgroup:
/// an element of the normalizer has trace 0 (anti-diagonal coset) or
/// square discriminant `a^2 - 4 ell` mod p (diagonal part).
pub fn split_cartan_compatible(a_ell: i64, ell: u64, p: u64) -> Result<bool, GaloisError> {
    if ell == p {
        return Err(GaloisError::EllEqualsP { p });
    }
    if a_ell % p as i64 == 0 {
        return Ok(true);
    }
    let disc = a_ell * a_ell - 4 * ell as i64;
    Ok(legendre(disc, p) >= 0)
}

/// Scans good primes `ell <= ell_max`, `ell != p`, and rules out
/// containment at the first incompatible trace.
pub fn classify_point_image(e: &CurveModel, p: u64, ell_max: u64) -> ImageVerdict {
    let mut traces_used = 0usize;
    let mut bad_skipped = 0usize;
    for ell in crate::arith::primes_in(2, ell_max) {
        if ell == p {
            continue;
        }
        if !e.has_good_reduction(ell) {
            bad_skipped += 1;
            continue;
        }
        let a = trace_of_frobenius(e, ell).expect("good reduction checked");
        traces_used += 1;
        if !split_cartan_compatible(a, ell, p).expect("ell != p") {
            return ImageVerdict {
                p,
                status: ImageStatus::RuledOut,
                witness_ell: Some(ell),
                traces_used,
                bad_primes_skipped: bad_skipped,
            };
        }
    }
    ImageVerdict {
        p,
        status: ImageStatus::PossiblyContained,
        witness_ell: None,
        traces_used,
        bad_primes_skipped: bad_skipped,
    }
}

/// A class-number-one CM point: integral j-invariant and the discriminant
/// of its CM order.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CmPoint {
    pub j: i64,
    pub discriminant: i64,
}

/// The thirteen class-number-one CM j-invariants with their discriminants.
pub fn cm_j_invariants() -> Vec<CmPoint> {
    [
        (0, -3),
        (1728, -4),
        (-3375, -7),
        (8000, -8),
        (54000, -12),
        (287496, -16),
        (-32768, -11),
        (16581375, -28),
        (-884736, -19),
        (-12288000, -27),
        (-884736000, -43),
        (-147197952000, -67),
        (-262537412640768000, -163),
    ]
    .into_iter()
    .map(|(j, discriminant)| CmPoint { j, discriminant })
    .collect()
}

/// Odd primes `p <= p_max` not dividing `disc` with `disc` a nonzero
/// square mod p -- the primes where a curve with CM by the order of
/// discriminant `disc` acquires a *split* Cartan-normalizer structure.
pub fn cm_split_primes(disc: i64, p_max: u64) -> Vec<u64> {
    assert!(disc < 0, "CM discriminant must be negative");
    crate::arith::primes_in(3, p_max)
        .filter(|&p| disc % p as i64 != 0 && legendre(disc, p) == 1)
        .collect()
}

/// A Weierstrass model with the given rational j-invariant.
///
/// For `j != 0, 1728` this is the twist-free `A = 3j(1728-j)`,
/// `B = 2j(1728-j)^2` model with denominators cleared; `j = 0` and
/// `j = 1728` get `y^2 = x^3 + 1` and `y^2 = x^3 + x`. Twists change
/// traces only by characters, which the trace-zero/square-discriminant
/// test absorbs in the quadratic case.
pub fn curve_from_j(j: &BigRational) -> CurveModel {
    if j.is_zero() {
        return CurveModel::short(BigInt::zero(), BigInt::from(1)).unwrap();
    }
    if *j == BigRational::from(BigInt::from(1728)) {
        return CurveModel::short(BigInt::from(1), BigInt::zero()).unwrap();
    }
    let m = j.numer().clone();
    let n = j.denom().clone();
    let k = BigInt::from(1728) * &n - &m;
    // scale (x, y) -> (x/n^2, y/n^3) to clear denominators
    let a = 3 * &m * &k * &n * &n;
    let b = 2 * &m * &k * &k * &n * &n * &n;
    CurveModel::short(a, b).expect("nonsingular for j != 0, 1728")
}

pub fn curve_from_j_int(j: i64) -> CurveModel {
    curve_from_j(&BigRational::from(BigInt::from(j)))
}

/// Confirms a CM entry by its supersingular-trace pattern: at every good
/// inert prime (`(disc | ell) = -1`) in `[5, 100]` the trace must vanish.
pub fn verify_cm_entry(point: &CmPoint) -> bool {
    let e = curve_from_j_int(point.j);
    let mut checked = 0;
    for ell in crate::arith::primes_in(5, 100) {
        if legendre(point.discriminant, ell) != -1 || !e.has_good_reduction(ell) {
            continue;
        }
        match trace_of_frobenius(&e, ell) {
            Ok(0) => checked += 1,
            _ => return false,
        }
    }
    checked > 0
}

/// Independent trace computation for short models and `ell > 3`, via the
/// Legendre-symbol character sum with modular exponentiation (no square
/// table); used as the second route in tests.
pub fn trace_short_curve_legendre(a: i64, b: i64, ell: u64) -> i64 {
    let mut sum = 0i64;
    let am = a.rem_euclid(ell as i64) as u64;
    let bm = b.rem_euclid(ell as i64) as u64;
    for x in 0..ell {
        let g = ((x * x % ell * x % ell) + am * x % ell + bm) % ell;
        if g == 0 {
            continue;
        }
        sum += if pow_mod(g, (ell - 1) / 2, ell) == 1 { 1 } else { -1 };
    }
    -sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve_37a() -> CurveModel {
        CurveModel::from_i64(0, 0, 1, -1, 0).unwrap()
    }

    #[test]
    fn rejects_singular() {
        assert_eq!(CurveModel::from_i64(0, 0, 0, 0, 0), Err(GaloisError::SingularCurve));
    }

    #[test]
    fn discriminant_and_j_of_37a() {
        let e = curve_37a();
        assert_eq!(e.discriminant(), BigInt::from(37));
        assert_eq!(e.j_invariant(), BigRational::new(BigInt::from(110592), BigInt::from(37)));
    }

    #[test]
    fn trace_37a_at_2() {
        assert_eq!(trace_of_frobenius(&curve_37a(), 2).unwrap(), -2);
    }

    #[test]
    fn trace_supersingular() {
        let e = CurveModel::short(BigInt::zero(), BigInt::from(1)).unwrap();
        assert_eq!(trace_of_frobenius(&e, 5).unwrap(), 0);
        // a_ell = 0 at every prime ell = 2 mod 3
        for ell in crate::arith::primes_in(5, 500) {
            if ell % 3 == 2 {
                assert_eq!(trace_of_frobenius(&e, ell).unwrap(), 0, "ell = {ell}");
            }
        }
    }

    #[test]
    fn trace_bad_reduction() {
        assert!(matches!(
            trace_of_frobenius(&curve_37a(), 37),
            Err(GaloisError::BadReduction { ell: 37 })
        ));
    }

    #[test]
    fn hasse_bound_small() {
        let e = curve_37a();
        for ell in crate::arith::primes_in(2, 200) {
            if !e.has_good_reduction(ell) {
                continue;
            }
            let a = trace_of_frobenius(&e, ell).unwrap();
            assert!((a * a) as f64 <= 4.0 * ell as f64, "ell = {ell}, a = {a}");
        }
    }

    #[test]
    fn compatibility_basics() {
        assert!(split_cartan_compatible(0, 3, 7).unwrap());
        // 1 - 12 = -11 = 3 mod 7, not a square mod 7
        assert!(!split_cartan_compatible(1, 3, 7).unwrap());
        // repeated eigenvalue: 5^2 - 4*11 = -19 = 0 mod 19
        assert!(split_cartan_compatible(5, 11, 19).unwrap());
        // sign invariance
        for (a, ell, p) in [(3i64, 5u64, 11u64), (4, 7, 13), (1, 3, 7)] {
            assert_eq!(
                split_cartan_compatible(a, ell, p).unwrap(),
                split_cartan_compatible(-a, ell, p).unwrap()
            );
        }
        assert!(matches!(split_cartan_compatible(1, 7, 7), Err(GaloisError::EllEqualsP { p: 7 })));
    }

    #[test]
    fn classify_non_cm_ruled_out() {
        let v = classify_point_image(&curve_37a(), 17, 200);
        assert_eq!(v.status, ImageStatus::RuledOut);
        assert!(v.witness_ell.unwrap() <= 200);
    }

    #[test]
    fn classify_vacuous_scan() {
        let v = classify_point_image(&curve_37a(), 17, 1);
        assert_eq!(v.status, ImageStatus::PossiblyContained);
        assert_eq!(v.traces_used, 0);
    }

    #[test]
    fn classify_cm_contained() {
        // j = 1728 has CM by Z[i]; for p = 1 mod 4 the image lies in a
        // split Cartan normalizer
        let e = curve_from_j_int(1728);
        let v = classify_point_image(&e, 13, 200);
        assert_eq!(v.status, ImageStatus::PossiblyContained);
    }

    #[test]
    fn cm_list_shape() {
        let list = cm_j_invariants();
        assert_eq!(list.len(), 13);
        assert!(list.iter().any(|c| c.j == 1728 && c.discriminant == -4));
        // pi sqrt(163) = 40.109, attained at the largest discriminant
        let max_log = list.iter().map(|c| (c.j.abs() as f64).ln()).fold(0.0, f64::max);
        assert!((max_log - 40.109).abs() < 1e-3);
    }

    #[test]
    fn cm_split_prime_examples() {
        assert_eq!(cm_split_primes(-4, 20), vec![5, 13, 17]);
        assert_eq!(cm_split_primes(-163, 50), vec![41, 43, 47]);
        assert!(!cm_split_primes(-3, 10).contains(&3));
    }

    #[test]
    fn curve_from_rational_j() {
        let j = BigRational::new(BigInt::from(110592), BigInt::from(37));
        let e = curve_from_j(&j);
        assert_eq!(e.j_invariant(), j);
    }

    #[test]
    fn legendre_route_agrees() {
        for (a, b) in [(2i64, 3i64), (-1, 1), (5, -7)] {
            let e = CurveModel::short(BigInt::from(a), BigInt::from(b)).unwrap();
            for ell in crate::arith::primes_in(5, 60) {
                if !e.has_good_reduction(ell) {
                    continue;
                }
                assert_eq!(
                    trace_of_frobenius(&e, ell).unwrap(),
                    trace_short_curve_legendre(a, b, ell),
                    "A={a} B={b} ell={ell}"
                );
            }
        }
    }
}
