mod common;

use mss_core::magic::c_closed_form;
use mss_core::qcore::Basis;
use mss_core::tomo::{
    bootstrap, experiment_table, post_select_and_correct, reconstruct, sample_run, tomography, NoiseModel, TomoTarget,
};
use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_8};

#[test]
fn identical_seeds_give_identical_tables() {
    let noise = NoiseModel::symmetric(0.003, 0.015, 0.01).unwrap();
    let a = experiment_table(&[FRAC_PI_8, FRAC_PI_4], 1024, &noise, 99, 100).unwrap();
    let b = experiment_table(&[FRAC_PI_8, FRAC_PI_4], 1024, &noise, 99, 100).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = experiment_table(&[FRAC_PI_8, FRAC_PI_4], 1024, &noise, 100, 100).unwrap();
    assert_ne!(serde_json::to_string(&a.rows).unwrap(), serde_json::to_string(&c.rows).unwrap());
}

#[test]
fn large_sample_limit_approaches_closed_form() {
    let shots = 1 << 17;
    for phi in [FRAC_PI_8, FRAC_PI_4, FRAC_PI_3, 3.0 * FRAC_PI_4] {
        let d = tomography(phi, TomoTarget::Charlie, Basis::X, shots, &NoiseModel::ideal(), 2024).unwrap();
        let tol = 3.0 / (d.result.n_eff as f64).sqrt();
        assert!((d.result.c_value - c_closed_form(phi)).abs() <= tol, "φ = {phi}: {}", d.result.c_value);
    }
}

#[test]
fn unauthorised_party_stays_free_under_noise() {
    let mut free = 0;
    for seed in 0..200u64 {
        let p1 = 0.05 * (seed % 5) as f64 / 4.0;
        let p2 = 0.05 * ((seed / 5) % 5) as f64 / 4.0;
        let r = 0.03 * ((seed / 25) % 4) as f64 / 3.0;
        let noise = NoiseModel::symmetric(p1, p2, r).unwrap();
        let bob = tomography(0.3 + 0.01 * seed as f64, TomoTarget::Bob, Basis::X, 4096, &noise, seed).unwrap();
        if bob.result.c_value == 0.0 {
            free += 1;
        }
    }
    assert!(free >= 198, "only {free} of 200 runs left Bob free");
}

#[test]
fn bootstrap_matches_run_to_run_spread() {
    let phi = FRAC_PI_4;
    let noise = NoiseModel::ideal();
    let cs: Vec<f64> = (0..100u64)
        .map(|seed| tomography(phi, TomoTarget::Charlie, Basis::X, 4096, &noise, 1000 + seed).unwrap().result.c_value)
        .collect();
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    let spread = (cs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (cs.len() - 1) as f64).sqrt();
    let d = tomography(phi, TomoTarget::Charlie, Basis::X, 4096, &noise, 7).unwrap();
    let (sigma_c, _) = bootstrap(&d.marginals, Some(phi), 500, 7).unwrap();
    let ratio = sigma_c / spread;
    assert!((0.5..=2.0).contains(&ratio), "bootstrap {sigma_c} vs spread {spread}");
}

#[test]
fn shot_noise_scale_of_a_single_estimator() {
    let counts = sample_run(FRAC_PI_4, Basis::Z, 4096, &NoiseModel::ideal(), 3).unwrap();
    let m = post_select_and_correct(&counts).unwrap();
    let n = m.n_eff() as f64;
    assert!((n - 2048.0).abs() < 4.0 * 32.0);
    assert!((1.0 / n.sqrt() - 0.022).abs() < 0.002);
}

#[test]
fn reconstruct_rejects_empty_samples() {
    let counts = sample_run(0.2, Basis::X, 16, &NoiseModel::ideal(), 1).unwrap();
    let m = post_select_and_correct(&counts).unwrap();
    let empty = mss_core::tomo::MarginalCounts { basis: Basis::Y, n0: 0, n1: 0 };
    let z = mss_core::tomo::MarginalCounts { basis: Basis::Z, n0: 1, n1: 1 };
    assert!(reconstruct(&m, &empty, &z, None).is_err());
}
