use aggint::specfun::{
    airy_ai, erfc, gamma, kummer_u, lower_incomplete_gamma, upper_incomplete_gamma,
};
use proptest::prelude::*;

const REL_TOL: f64 = 1e-12;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn incomplete_gammas_add_up(a in 0.05f64..20.0, x in 0.0f64..60.0) {
        let lower = lower_incomplete_gamma(a, x).unwrap();
        let upper = upper_incomplete_gamma(a, x).unwrap();
        let full = gamma(a).unwrap();
        prop_assert!((lower + upper - full).abs() <= 10.0 * REL_TOL * full,
            "a={a} x={x}: {lower} + {upper} vs {full}");
    }

    #[test]
    fn gamma_recurrence(x in 1e-3f64..10.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 10.0 * REL_TOL * lhs.abs());
    }

    #[test]
    fn erfc_strictly_decreasing(x in -6.0f64..6.0, dx in 1e-3f64..1.0) {
        prop_assert!(erfc(x + dx) < erfc(x));
    }

    #[test]
    fn airy_positive_and_decreasing(x in 0.0f64..40.0, dx in 1e-3f64..1.0) {
        let (a, b) = (airy_ai(x), airy_ai(x + dx));
        prop_assert!(b > 0.0 && b < a, "x={x}: {a} {b}");
    }
}

#[test]
fn erfc_limits() {
    assert_eq!(erfc(0.0), 1.0);
    assert!(erfc(10.0) < 1e-40);
    assert!(erfc(30.0) >= 0.0 && erfc(30.0) < 1e-300);
}

/// `U(a, a+1, x) = x^{-a}`.
#[test]
fn kummer_u_power_identity() {
    for a in [0.1, 0.5, 1.0] {
        for x in [0.1f64, 1.0, 10.0] {
            let v = kummer_u(a, a + 1.0, x).unwrap() * x.powf(a);
            assert!((v - 1.0).abs() < 1e-10, "a={a} x={x}: {v}");
        }
    }
}
