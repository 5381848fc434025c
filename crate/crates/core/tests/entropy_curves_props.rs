use proptest::prelude::*;
use stretchlab::entropy_curves::{self, CurveKind, HEISENBERG};

#[test]
fn quantum_curve_vanishes_at_heisenberg_bound() {
    assert_eq!(entropy_curves::s_quantum(HEISENBERG).unwrap(), 0.0);
    assert!(entropy_curves::s_quantum(0.49).is_err());
    assert!(entropy_curves::s_classical(0.0).is_err());
    assert!(entropy_curves::s_quantum_rescaled(1.0, 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classical_curve_bounds_quantum_from_above(sigma in 0.5..1e4f64) {
        let gap = entropy_curves::s_classical(sigma).unwrap() - entropy_curves::s_quantum(sigma).unwrap();
        // S_C − S_Q = 1/(24Σ²) + O(1/Σ⁴), largest (1 − ln 2) at the bound
        prop_assert!(gap >= 1.0 / (24.0 * sigma * sigma) - 1e-12);
        prop_assert!(gap <= (1.0 - 2f64.ln()) + 1e-12);
        if sigma > 2.0 {
            prop_assert!(gap <= 1.1 / (24.0 * sigma * sigma));
        }
    }

    #[test]
    fn rescaled_curve_tends_to_classical(sigma in 0.5..5.0f64, k in 1u32..5) {
        let lambda = 10f64.powi(k as i32);
        let gap = entropy_curves::s_quantum_rescaled(sigma, lambda).unwrap() - entropy_curves::s_classical(sigma).unwrap();
        prop_assert!(gap <= 0.0);
        prop_assert!(-gap <= 1.1 / (24.0 * (lambda * sigma).powi(2)));
    }

    #[test]
    fn curves_increase_with_uncertainty(sigma in 0.5..100.0f64, d in 1e-3..1.0f64, lambda in 1.0..50.0f64) {
        for kind in [CurveKind::Classical, CurveKind::Quantum, CurveKind::Rescaled(lambda)] {
            prop_assert!(kind.entropy(sigma + d).unwrap() > kind.entropy(sigma).unwrap());
        }
    }

    #[test]
    fn inverse_round_trips(sigma in 0.5..200.0f64, lambda in 1.0..50.0f64) {
        for kind in [CurveKind::Classical, CurveKind::Quantum, CurveKind::Rescaled(lambda)] {
            let s = kind.entropy(sigma).unwrap();
            let back = entropy_curves::sigma_from_entropy(s, kind).unwrap();
            prop_assert!((back - sigma).abs() <= 1e-8 * sigma, "{kind:?}: {back} vs {sigma}");
        }
    }
}
