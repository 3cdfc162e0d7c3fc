mod common;

use common::*;
use mss_core::protocol::{
    check_gate_admissibility, column_sum_condition, middle_marginal_after_dealer_plus, run_all_branches,
    run_exact, security_report,
};
use mss_core::qcore::{DensityMatrix, PureState, Unitary1Q};
use proptest::prelude::*;
use std::f64::consts::TAU;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn all_branches_deliver_the_same_state(phi in 0.0..TAU, n in 3usize..=6) {
        let branches = run_all_branches(phi, n).unwrap();
        prop_assert_eq!(branches.len(), 1 << (n - 1));
        let reference = &branches[0].final_pure;
        for t in &branches {
            prop_assert!(t.final_pure.overlap(reference).unwrap() >= 1.0 - 1e-12);
        }
        let total: f64 = branches.iter().map(|t| t.branch_probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn remaining_register_is_a_shorter_phase_ghz(phi in 0.0..TAU, n in 3usize..=6, mask in 0usize..32) {
        let outcomes: Vec<_> = (0..n - 1)
            .map(|j| mss_core::protocol::Outcome::from_bit(((mask >> j) & 1) as u8))
            .collect();
        let t = run_exact(phi, n, Some(&outcomes)).unwrap();
        for (j, step) in t.steps.iter().enumerate() {
            let expected = PureState::ghz_with_phase(n - j - 1, phi).unwrap();
            prop_assert!(step.register.overlap(&expected).unwrap() >= 1.0 - 1e-12, "after round {}", j + 1);
        }
    }

    #[test]
    fn non_recipients_only_ever_see_maximally_mixed_states(phi in 0.0..TAU, n in 3usize..=6, mask in 0usize..32) {
        let outcomes: Vec<_> = (0..n - 1)
            .map(|j| mss_core::protocol::Outcome::from_bit(((mask >> j) & 1) as u8))
            .collect();
        let t = run_exact(phi, n, Some(&outcomes)).unwrap();
        let report = security_report(&t).unwrap();
        prop_assert!(report.secure(1e-12));
        let i2 = DensityMatrix::maximally_mixed(1);
        for step in t.steps.iter().filter(|s| s.remaining_parties.len() >= 2) {
            for (party, m) in step.remaining_parties.iter().zip(&step.marginals) {
                if *party != n - 1 {
                    prop_assert!(m.trace_distance(&i2).unwrap() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn unauthorised_view_is_independent_of_the_secret(a in 0.0..TAU, b in 0.0..TAU) {
        let bob = |phi| run_exact(phi, 3, None).unwrap().intermediate_marginals[1].clone();
        prop_assert!(bob(a).trace_distance(&bob(b)).unwrap() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn column_sums_match_marginal_for_random_gates(u in unitary()) {
        let secure = column_sum_condition(&u.matrix());
        let mixed = middle_marginal_after_dealer_plus(&u)
            .map(|m| m.trace_distance(&DensityMatrix::maximally_mixed(1)).unwrap() <= 1e-10)
            .unwrap_or(false);
        prop_assert_eq!(secure, mixed);
    }

    #[test]
    fn column_sums_match_marginal_for_constructed_secure_gates(theta in 0.0..TAU, chi in 0.0..TAU) {
        let g = secure_gate(theta, chi);
        prop_assert!(column_sum_condition(&g.matrix()));
        let m = middle_marginal_after_dealer_plus(&g).unwrap();
        prop_assert!(m.trace_distance(&DensityMatrix::maximally_mixed(1)).unwrap() <= 1e-10);
    }
}

#[test]
fn phase_and_x_rotation_families() {
    let probes: Vec<f64> = (1..=16).map(|k| TAU * k as f64 / 17.0).collect();
    let p = check_gate_admissibility(Unitary1Q::phase, &probes).unwrap();
    assert!(p.secure && p.faithful);
    let x = check_gate_admissibility(|phi| Unitary1Q::exp_ix(phi / 2.0), &probes).unwrap();
    assert!(x.secure && !x.faithful);
    assert!(x.probes.iter().all(|pr| pr.recipient_c <= 1e-9));
}
