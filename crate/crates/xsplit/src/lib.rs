//! Numerical workbench for modular units on the split Cartan modular curve.
//!
//! The crate evaluates Siegel functions and the modular unit `U_c` on the
//! upper half-plane, checks the asymptotic envelopes that drive the
//! Runge-type bound `log|j| <= 2*pi*sqrt(p) + 6*log(p) + C` for integral
//! points, and probes split-Cartan-normalizer Galois images of concrete
//! elliptic curves through Frobenius traces.
//!
//! Modules:
//! - [`qnum`]: q-expansion numerics (eta, j, fundamental-domain reduction)
//! - [`siegel`]: exact index algebra on `(N^-1 Z/Z)^2` and `log|g_a|`
//! - [`unit`]: the index set `A*beta_c`, `log|U_c|`, and envelope verifiers
//! - [`runge`]: bound calculators and the crossing-point solver
//! - [`galois`]: point counting, Frobenius traces, CM data
//! - [`constants`]: frozen calibration constants and the constants file

pub mod arith;
pub mod cli;
pub mod constants;
pub mod galois;
pub mod qnum;
pub mod runge;
pub mod siegel;
pub mod unit;
