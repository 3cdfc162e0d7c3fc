mod common;

use common::*;
use mss_core::magic::{c_closed_form, octahedron_distance, wigner_distance};
use mss_core::qcore::{BlochVector, DensityMatrix, PureState};
use mss_core::stabilizer::{single_qubit_cliffords, stabilizer_set};
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

#[test]
fn closed_form_on_equispaced_grid() {
    for k in 1..=100 {
        let phi = FRAC_PI_2 * k as f64 / 101.0;
        let c = wigner_distance(&PureState::phase_plus(phi).to_density()).unwrap().c_value;
        assert!((c - c_closed_form(phi)).abs() <= 1e-7, "φ = {phi}");
    }
}

#[test]
fn stabilizer_states_have_zero_magic() {
    for n in 1..=2 {
        for s in stabilizer_set(n).unwrap().states() {
            assert!(wigner_distance(&s.to_density()).unwrap().c_value <= 1e-9);
        }
    }
}

#[test]
fn single_qubit_vertices_lie_on_the_octahedron_surface() {
    for s in stabilizer_set(1).unwrap().states() {
        assert!((s.to_density().bloch().unwrap().l1_norm() - 1.0).abs() < 1e-12);
    }
}

/// The Wootters vertices of two qubits are not all nonnegative. Recorded here
/// as a measured fact: 48 of the 60 vertices are product states and nonnegative,
/// the 12 entangled ones carry entries of −1/8.
#[test]
fn two_qubit_vertex_sign_report() {
    let set = stabilizer_set(2).unwrap();
    let negative: Vec<_> = set.wigner_vertices().iter().filter(|w| w.values().iter().any(|&v| v < -1e-12)).collect();
    assert_eq!(negative.len(), 12);
    for w in negative {
        let min = w.values().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min + 0.125).abs() < 1e-12);
    }
}

fn random_bloch() -> impl Strategy<Value = BlochVector> {
    bloch_in_ball()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn octahedron_membership(b in random_bloch()) {
        let c = wigner_distance(&DensityMatrix::from_bloch(&b)).unwrap().c_value;
        if b.l1_norm() <= 1.0 - 1e-6 {
            prop_assert!(c <= 1e-9);
        } else if b.l1_norm() > 1.0 + 1e-6 {
            prop_assert!(c > 0.0);
        }
    }

    #[test]
    fn lp_matches_octahedron_formula(rho in mixed_state(1)) {
        let c = wigner_distance(&rho).unwrap().c_value;
        prop_assert!((c - octahedron_distance(&rho.bloch().unwrap())).abs() < 1e-9);
    }

    #[test]
    fn near_mixed_states_are_free(x in -0.066..0.066f64, y in -0.066..0.066f64, z in -0.066..0.066f64) {
        let rho = DensityMatrix::from_bloch(&BlochVector::new(x, y, z).unwrap());
        prop_assert_eq!(wigner_distance(&rho).unwrap().c_value, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn lp_matches_octahedron_formula_on_pure_states(psi in pure_state(1)) {
        let rho = psi.to_density();
        let c = wigner_distance(&rho).unwrap().c_value;
        prop_assert!((c - octahedron_distance(&rho.bloch().unwrap())).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn clifford_invariance(rho in mixed_state(1)) {
        let c = wigner_distance(&rho).unwrap().c_value;
        for u in single_qubit_cliffords() {
            let rotated = rho.apply_1q(&u, 0).unwrap();
            prop_assert!((wigner_distance(&rotated).unwrap().c_value - c).abs() <= 1e-7);
        }
    }

    #[test]
    fn convexity(a in mixed_state(1), b in mixed_state(1), lambda in 0.0..1.0f64) {
        let mix = DensityMatrix::mixture(&[(lambda, &a), (1.0 - lambda, &b)]).unwrap();
        let lhs = wigner_distance(&mix).unwrap().c_value;
        let rhs = lambda * wigner_distance(&a).unwrap().c_value + (1.0 - lambda) * wigner_distance(&b).unwrap().c_value;
        prop_assert!(lhs <= rhs + 1e-7);
    }

    #[test]
    fn dual_consistency(rho in prop_oneof![mixed_state(1), mixed_state(2)]) {
        let r = wigner_distance(&rho).unwrap();
        prop_assert!((r.witness_at(&rho).unwrap() - r.c_value).abs() <= 1e-7);
        for v in stabilizer_set(rho.n_qubits()).unwrap().states() {
            prop_assert!(v.to_density().expectation(&r.dual_witness).unwrap() <= r.f_lhs + 1e-9);
        }
        prop_assert!(r.c_value >= 0.0);
        let total: f64 = r.mixture_weights.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(r.mixture_weights.iter().all(|&w| w >= -1e-12));
    }
}
