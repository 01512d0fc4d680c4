//! High-precision evaluation of q-expansion objects on the upper half-plane:
//! rational q-powers, the Dedekind eta function, the modular invariant j,
//! and reduction to the standard fundamental domain.
//!
//! All truncated series carry an explicit geometric tail majorant; an
//! evaluation either meets the requested absolute error or reports budget
//! exhaustion.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use std::f64::consts::PI;
use thiserror::Error;

pub type Rational = Ratio<i64>;

#[derive(Debug, Error, PartialEq)]
pub enum QnumError {
    #[error("point {re} + {im}i is not in the upper half-plane")]
    NotUpperHalfPlane { re: f64, im: f64 },
    #[error("matrix [[{a},{b}],[{c},{d}]] has determinant != 1")]
    NotUnimodular { a: i64, b: i64, c: i64, d: i64 },
    #[error("truncation budget exhausted: tail bound {tail:e} > target {target:e} after {terms} terms")]
    BudgetExhausted { tail: f64, target: f64, terms: usize },
    #[error("|q| = {q_abs} exceeds the certified-truncation domain (|q| <= {limit})")]
    QTooLarge { q_abs: f64, limit: f64 },
    #[error("invalid truncation budget: target_abs_error must be positive")]
    InvalidBudget,
}

/// A point `tau = x + iy` of the upper half-plane, `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlanePoint {
    x: f64,
    y: f64,
}

impl HalfPlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self, QnumError> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(QnumError::NotUpperHalfPlane { re: x, im: y });
        }
        Ok(HalfPlanePoint { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// `log|q| = -2 pi y`, always negative.
    pub fn log_q_abs(&self) -> f64 {
        -2.0 * PI * self.y
    }

    /// `q = e^{2 pi i tau}`, `|q| < 1`.
    pub fn q(&self) -> Complex64 {
        let r = self.log_q_abs().exp();
        let theta = 2.0 * PI * self.x;
        Complex64::new(r * theta.cos(), r * theta.sin())
    }

    pub fn q_abs(&self) -> f64 {
        self.log_q_abs().exp()
    }

    /// `|tau|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// An integer matrix of determinant 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnimodularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl UnimodularMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self, QnumError> {
        if a * d - b * c != 1 {
            return Err(QnumError::NotUnimodular { a, b, c, d });
        }
        Ok(UnimodularMatrix { a, b, c, d })
    }

    pub fn identity() -> Self {
        UnimodularMatrix { a: 1, b: 0, c: 0, d: 1 }
    }

    /// Translation `tau -> tau + n`.
    pub fn translation(n: i64) -> Self {
        UnimodularMatrix { a: 1, b: n, c: 0, d: 1 }
    }

    /// Inversion `S: tau -> -1/tau`.
    pub fn inversion() -> Self {
        UnimodularMatrix { a: 0, b: -1, c: 1, d: 0 }
    }

    pub fn mul(&self, rhs: &UnimodularMatrix) -> UnimodularMatrix {
        UnimodularMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn inverse(&self) -> UnimodularMatrix {
        UnimodularMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Moebius action `tau -> (a tau + b)/(c tau + d)`.
    pub fn apply(&self, tau: &HalfPlanePoint) -> HalfPlanePoint {
        let z = Complex64::new(tau.x, tau.y);
        let num = Complex64::new(self.a as f64, 0.0) * z + Complex64::new(self.b as f64, 0.0);
        let den = Complex64::new(self.c as f64, 0.0) * z + Complex64::new(self.d as f64, 0.0);
        let w = num / den;
        // Im(gamma tau) = Im(tau)/|c tau + d|^2 > 0, so this cannot fail.
        HalfPlanePoint { x: w.re, y: w.im }
    }
}

/// Absolute-error target and term cap for truncated series.
#[derive(Debug, Clone, Copy)]
pub struct TruncationBudget {
    pub target_abs_error: f64,
    pub max_terms: usize,
}

impl TruncationBudget {
    pub fn new(target_abs_error: f64, max_terms: usize) -> Result<Self, QnumError> {
        if !(target_abs_error > 0.0) {
            return Err(QnumError::InvalidBudget);
        }
        Ok(TruncationBudget { target_abs_error, max_terms })
    }
}

impl Default for TruncationBudget {
    fn default() -> Self {
        TruncationBudget { target_abs_error: 1e-12, max_terms: 100_000 }
    }
}

/// `q^alpha = e^{2 pi i alpha tau}` for exact rational `alpha`.
pub fn q_pow(tau: &HalfPlanePoint, alpha: Rational) -> Complex64 {
    let af = alpha.to_f64().expect("rational exponent fits in f64");
    let r = (af * tau.log_q_abs()).exp();
    let theta = 2.0 * PI * af * tau.x;
    Complex64::new(r * theta.cos(), r * theta.sin())
}

/// `log|eta(tau)| = (1/24) log|q| + sum_{k>=1} log|1 - q^k|`, with the tail
/// bounded by `|q|^N / ((1-|q|)^2)`.
pub fn eta_log_abs(tau: &HalfPlanePoint, budget: &TruncationBudget) -> Result<f64, QnumError> {
    let r = tau.q_abs();
    if r > 0.99 {
        return Err(QnumError::QTooLarge { q_abs: r, limit: 0.99 });
    }
    let q = tau.q();
    let mut acc = tau.log_q_abs() / 24.0;
    let mut qk = Complex64::new(1.0, 0.0);
    let mut rk = 1.0f64;
    for k in 1..=budget.max_terms {
        qk *= q;
        rk *= r;
        acc += (Complex64::new(1.0, 0.0) - qk).norm().ln();
        let tail = rk * r / ((1.0 - r) * (1.0 - r));
        if tail <= budget.target_abs_error {
            return Ok(acc);
        }
        let _ = k;
    }
    Err(QnumError::BudgetExhausted {
        tail: rk * r / ((1.0 - r) * (1.0 - r)),
        target: budget.target_abs_error,
        terms: budget.max_terms,
    })
}

/// `log|Delta(tau)| = 24 log|eta(tau)|`.
pub fn delta_log_abs(tau: &HalfPlanePoint, budget: &TruncationBudget) -> Result<f64, QnumError> {
    Ok(24.0 * eta_log_abs(tau, budget)?)
}

/// Weight-4 Eisenstein series `E4(tau) = 1 + 240 sum_{n>=1} n^3 q^n/(1-q^n)`.
fn eisenstein_e4(tau: &HalfPlanePoint, budget: &TruncationBudget) -> Result<Complex64, QnumError> {
    let r = tau.q_abs();
    if r > 0.99 {
        return Err(QnumError::QTooLarge { q_abs: r, limit: 0.99 });
    }
    let q = tau.q();
    let one = Complex64::new(1.0, 0.0);
    let mut acc = one;
    let mut qn = one;
    let mut rn = 1.0f64;
    for n in 1..=budget.max_terms {
        qn *= q;
        rn *= r;
        let nf = n as f64;
        acc += 240.0 * nf * nf * nf * qn / (one - qn);
        // t_{n+1}/t_n <= r ((n+1)/n)^3; once that ratio is < 1 the tail is
        // dominated by a geometric series.
        let ratio = r * ((nf + 1.0) / nf).powi(3);
        if ratio < 1.0 {
            let term = 240.0 * nf * nf * nf * rn / (1.0 - r);
            let tail = term * ratio / (1.0 - ratio);
            if tail <= budget.target_abs_error {
                return Ok(acc);
            }
        }
    }
    Err(QnumError::BudgetExhausted {
        tail: f64::INFINITY,
        target: budget.target_abs_error,
        terms: budget.max_terms,
    })
}

/// The modular invariant `j(tau) = E4(tau)^3 / Delta(tau)`.
///
/// Intended for moderate `y`; for large `y` the discriminant underflows and
/// [`j_log_abs`] should be used instead.
pub fn j_invariant(tau: &HalfPlanePoint, budget: &TruncationBudget) -> Result<Complex64, QnumError> {
    let e4 = eisenstein_e4(tau, budget)?;
    let q = tau.q();
    let one = Complex64::new(1.0, 0.0);
    let r = tau.q_abs();
    let mut prod = one;
    let mut qn = one;
    let mut rn = 1.0f64;
    for _ in 1..=budget.max_terms {
        qn *= q;
        rn *= r;
        prod *= one - qn;
        let tail = rn * r / ((1.0 - r) * (1.0 - r));
        if tail <= budget.target_abs_error {
            let delta = q * prod.powi(24);
            return Ok(e4 * e4 * e4 / delta);
        }
    }
    Err(QnumError::BudgetExhausted {
        tail: rn * r / ((1.0 - r) * (1.0 - r)),
        target: budget.target_abs_error,
        terms: budget.max_terms,
    })
}

/// `log|j(tau)|`, computed in log scale as `3 log|E4| - log|Delta|` so that
/// deep-cusp points (`y` large, `Delta` underflowing) stay representable.
pub fn j_log_abs(tau: &HalfPlanePoint, budget: &TruncationBudget) -> Result<f64, QnumError> {
    let e4 = eisenstein_e4(tau, budget)?;
    let log_delta = delta_log_abs(tau, budget)?;
    Ok(3.0 * e4.norm().ln() - log_delta)
}

/// Reduces `tau` into the standard fundamental domain.
///
/// Returns `(tau', gamma)` with `gamma tau' = tau`, `|Re tau'| <= 1/2`,
/// `|tau'| >= 1`, and `Re tau' <= 0` whenever `tau'` lies on the boundary
/// `|tau'| = 1` or `|Re tau'| = 1/2`.
pub fn fundamental_domain_reduce(tau: &HalfPlanePoint) -> (HalfPlanePoint, UnimodularMatrix) {
    const EPS: f64 = 1e-12;
    let mut t = *tau;
    let mut gamma = UnimodularMatrix::identity();
    loop {
        let n = t.x.round();
        if n != 0.0 {
            t = HalfPlanePoint { x: t.x - n, y: t.y };
            gamma = gamma.mul(&UnimodularMatrix::translation(n as i64));
        }
        if t.norm_sq() < 1.0 - EPS {
            // tau = S tau'' with tau'' = -1/tau.
            let n2 = t.norm_sq();
            t = HalfPlanePoint { x: -t.x / n2, y: t.y / n2 };
            gamma = gamma.mul(&UnimodularMatrix::inversion());
        } else {
            break;
        }
    }
    // Boundary convention: keep Re <= 0 on |tau| = 1 and |Re| = 1/2.
    if t.x > EPS && (t.norm_sq() - 1.0).abs() <= 4.0 * EPS {
        let n2 = t.norm_sq();
        t = HalfPlanePoint { x: -t.x / n2, y: t.y / n2 };
        gamma = gamma.mul(&UnimodularMatrix::inversion());
    }
    if t.x > 0.5 - EPS {
        t = HalfPlanePoint { x: t.x - 1.0, y: t.y };
        gamma = gamma.mul(&UnimodularMatrix::translation(1));
    }
    (t, gamma)
}
