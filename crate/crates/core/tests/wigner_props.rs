mod common;

use common::*;
use mss_core::qcore::{DensityMatrix, PureState};
use mss_core::wigner::{state_from_wigner, wigner_of, PhasePoint, WignerVector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn normalised_for_one_and_two_qubits(a in mixed_state(1), b in mixed_state(2)) {
        prop_assert!((wigner_of(&a).unwrap().sum() - 1.0).abs() < 1e-10);
        prop_assert!((wigner_of(&b).unwrap().sum() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linear_in_the_state(a in mixed_state(2), b in mixed_state(2), lambda in 0.0..1.0f64) {
        let mix = DensityMatrix::mixture(&[(lambda, &a), (1.0 - lambda, &b)]).unwrap();
        let (wm, wa, wb) = (wigner_of(&mix).unwrap(), wigner_of(&a).unwrap(), wigner_of(&b).unwrap());
        for i in 0..16 {
            let expected = lambda * wa.values()[i] + (1.0 - lambda) * wb.values()[i];
            prop_assert!((wm.values()[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_through_state(rho in mixed_state(2)) {
        let w = wigner_of(&rho).unwrap();
        let back = wigner_of(&state_from_wigner(&w).unwrap()).unwrap();
        prop_assert!(w.l1_distance(&back) < 1e-10);
        let again = WignerVector::new(2, w.values().to_vec()).unwrap();
        prop_assert!(state_from_wigner(&again).unwrap().trace_distance(&rho).unwrap() < 1e-10);
    }

    #[test]
    fn phase_state_has_one_negative_entry(phi in 1e-3..(std::f64::consts::FRAC_PI_2 - 1e-3)) {
        let w = wigner_of(&PureState::phase_plus(phi).to_density()).unwrap();
        let negatives: Vec<usize> = (0..4).filter(|&i| w.values()[i] < 0.0).collect();
        let at = PhasePoint::new(vec![(0, 1)]).unwrap();
        prop_assert_eq!(negatives, vec![at.index()]);
        prop_assert!((w.at(&at) - (1.0 - phi.cos() - phi.sin()) / 4.0).abs() < 1e-12);
    }
}
