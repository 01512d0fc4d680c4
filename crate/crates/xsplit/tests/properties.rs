//! Randomized invariants, shrunk by proptest on failure.

use proptest::prelude::*;
use xsplit::galois::{trace_of_frobenius, CurveModel};
use xsplit::qnum::{fundamental_domain_reduce, HalfPlanePoint, TruncationBudget, UnimodularMatrix};
use xsplit::siegel::{act_on_index, siegel_log_abs, IndexPair};
use xsplit::unit::{b2_sum, build_index_set};

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47])
}

proptest! {
    #[test]
    fn fundamental_domain_round_trip(x in -20.0f64..20.0, y in 0.05f64..50.0) {
        let tau = HalfPlanePoint::new(x, y).unwrap();
        let (reduced, gamma) = fundamental_domain_reduce(&tau);
        // gamma maps the reduced point back onto the input
        let back = gamma.apply(&reduced);
        prop_assert!((back.x() - tau.x()).abs() < 1e-8 * (1.0 + tau.x().abs()));
        prop_assert!((back.y() - tau.y()).abs() < 1e-8 * (1.0 + tau.y()));
        // membership in the closed fundamental domain
        prop_assert!(reduced.x().abs() <= 0.5 + 1e-9);
        prop_assert!(reduced.norm_sq() >= 1.0 - 1e-9);
    }

    #[test]
    fn matrix_inverse_is_identity(a in -9i64..10, b in -9i64..10, n in -9i64..10) {
        // build a unimodular matrix as a word in the generators
        let m = UnimodularMatrix::translation(a)
            .mul(&UnimodularMatrix::inversion())
            .mul(&UnimodularMatrix::translation(b))
            .mul(&UnimodularMatrix::translation(n));
        let id = m.mul(&m.inverse());
        prop_assert_eq!(id, UnimodularMatrix::identity());
    }

    #[test]
    fn index_action_is_functorial(n1 in 0i64..13, n2 in 0i64..13, s in -3i64..4, t in -3i64..4) {
        prop_assume!((n1, n2) != (0, 0));
        let a = IndexPair::from_parts(n1, n2, 13).unwrap();
        let g1 = UnimodularMatrix::translation(s).mul(&UnimodularMatrix::inversion());
        let g2 = UnimodularMatrix::translation(t);
        let lhs = act_on_index(&act_on_index(&a, &g1), &g2);
        let rhs = act_on_index(&a, &g1.mul(&g2));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn siegel_is_even_in_the_index(n1 in 0i64..11, n2 in 0i64..11, y in 0.5f64..3.0) {
        prop_assume!((n1, n2) != (0, 0));
        let a = IndexPair::from_parts(n1, n2, 11).unwrap();
        let tau = HalfPlanePoint::new(0.1, y).unwrap();
        let b = TruncationBudget::default();
        let va = siegel_log_abs(&a, &tau, &b).unwrap();
        let vn = siegel_log_abs(&a.neg(), &tau, &b).unwrap();
        prop_assert!((va - vn).abs() < 1e-9);
    }

    #[test]
    fn b2_sum_closed_forms(p in small_prime(), c in -50i64..50) {
        let set = build_index_set(p, c).unwrap();
        let pi = p as i64;
        let expect = if c.rem_euclid(pi) == 0 {
            xsplit::qnum::Rational::new((pi - 1) * (pi - 1), 6 * pi)
        } else {
            xsplit::qnum::Rational::new(-(pi - 1), 3 * pi)
        };
        prop_assert_eq!(b2_sum(&set), expect);
        prop_assert_eq!(set.len(), 2 * (p as usize - 1));
    }

    #[test]
    fn hasse_bound(a4 in -30i64..30, a6 in -30i64..30, ell in prop::sample::select(vec![5u64, 7, 11, 13, 17, 19, 23])) {
        let e = match CurveModel::from_i64(0, 0, 0, a4, a6) {
            Ok(e) => e,
            Err(_) => return Ok(()), // singular: nothing to check
        };
        match trace_of_frobenius(&e, ell) {
            Ok(a) => {
                let bound = 2.0 * (ell as f64).sqrt();
                prop_assert!((a as f64).abs() <= bound, "a_{} = {} exceeds Hasse", ell, a);
            }
            Err(_) => {} // bad reduction at ell
        }
    }
}
