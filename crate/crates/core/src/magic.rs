//! Wigner distance to the stabilizer polytope, its LP dual witness, and the
//! closed-form single-qubit oracles.
//!
//! For a state ρ with Wigner vector `W`, the distance is
//! `C(ρ) = min_{λ ∈ Δ} ‖W − Fλ‖₁`, where the columns of `F` are the Wigner
//! vectors of the pure stabilizer states. The L1 norm is linearised with one
//! slack `t_α` per phase-space point:
//!
//! ```text
//! min Σ t_α   s.t.   Fλ + t − s⁺ = W,   −Fλ + t − s⁻ = −W,   Σλ = 1,   λ, t, s± ≥ 0
//! ```
//!
//! With row multipliers `u`, `w`, `μ`, the dual reads
//! `max (u − w)·W + μ` with `|y| ≤ 1` for `y = u − w` and `μ ≤ −max_v y·F_v`.
//! Hence `C(ρ) = y·W_ρ − max_v y·F_v`, and the Hermitian witness
//! `H* = Σ_α y_α A_α / 2^n` satisfies `tr(H*ρ) − F_LHS = C(ρ)` at the solved
//! state and `tr(H*σ) ≤ F_LHS` for every stabilizer state σ.

use serde::Serialize;

use crate::error::{MssError, Result};
use crate::lp::LinearProgram;
use crate::qcore::{BlochVector, DensityMatrix, Operator};
use crate::stabilizer::stabilizer_set;
use crate::wigner::{operator_from_dual, wigner_of, WignerVector};

/// Values this close to zero are reported as exactly zero.
pub const ZERO_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct MagicResult {
    pub c_value: f64,
    pub f_star: WignerVector,
    /// Weights over the stabilizer vertices, in [`crate::stabilizer::StabilizerSet`] order.
    pub mixture_weights: Vec<f64>,
    pub dual_witness: Operator,
    /// Coefficients `y_α` of the witness in the phase-point basis.
    pub dual_coefficients: Vec<f64>,
    pub f_lhs: f64,
}

impl MagicResult {
    /// `tr(H*ρ) − F_LHS`: equals C at the solved state, a lower bound on C elsewhere.
    pub fn witness_at(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(rho.expectation(&self.dual_witness)? - self.f_lhs)
    }

    pub fn witness_trace(&self, rho: &DensityMatrix) -> Result<f64> {
        rho.expectation(&self.dual_witness)
    }
}

/// Compact JSON view of a solve.
#[derive(Debug, Clone, Serialize)]
pub struct MagicSummary {
    pub c: f64,
    pub f_lhs: f64,
    pub witness_trace: f64,
    pub mixture: Vec<MixtureEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixtureEntry {
    pub stabilizer: String,
    pub weight: f64,
}

impl MagicResult {
    pub fn summary(&self, rho: &DensityMatrix) -> Result<MagicSummary> {
        let set = stabilizer_set(rho.n_qubits())?;
        let mixture = set
            .labels()
            .iter()
            .zip(&self.mixture_weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(l, &w)| MixtureEntry { stabilizer: l.clone(), weight: w })
            .collect();
        Ok(MagicSummary { c: self.c_value, f_lhs: self.f_lhs, witness_trace: self.witness_trace(rho)?, mixture })
    }
}

/// Solves the Wigner-distance LP for a 1- or 2-qubit state.
pub fn wigner_distance(rho: &DensityMatrix) -> Result<MagicResult> {
    let n = rho.n_qubits();
    let set = stabilizer_set(n)?;
    let w = wigner_of(rho)?;
    let vertices = set.wigner_vertices();
    let k = w.values().len();
    let m = vertices.len();

    // Columns: λ (m) | t (k) | s⁺ (k) | s⁻ (k).
    let n_vars = m + 3 * k;
    let mut objective = vec![0.0; n_vars];
    objective[m..m + k].iter_mut().for_each(|c| *c = 1.0);
    let mut constraints = Vec::with_capacity(2 * k + 1);
    let mut rhs = Vec::with_capacity(2 * k + 1);
    for (alpha, &wa) in w.values().iter().enumerate() {
        let mut row = vec![0.0; n_vars];
        vertices.iter().enumerate().for_each(|(v, f)| row[v] = f.values()[alpha]);
        row[m + alpha] = 1.0;
        row[m + k + alpha] = -1.0;
        constraints.push(row);
        rhs.push(wa);
    }
    for (alpha, &wa) in w.values().iter().enumerate() {
        let mut row = vec![0.0; n_vars];
        vertices.iter().enumerate().for_each(|(v, f)| row[v] = -f.values()[alpha]);
        row[m + alpha] = 1.0;
        row[m + 2 * k + alpha] = -1.0;
        constraints.push(row);
        rhs.push(-wa);
    }
    let mut simplex_row = vec![0.0; n_vars];
    simplex_row[..m].iter_mut().for_each(|c| *c = 1.0);
    constraints.push(simplex_row);
    rhs.push(1.0);

    let solution = LinearProgram { objective, constraints, rhs }.solve()?;

    let mixture_weights = solution.x[..m].to_vec();
    let f_values = (0..k)
        .map(|alpha| vertices.iter().zip(&mixture_weights).map(|(f, l)| l * f.values()[alpha]).sum())
        .collect();
    let f_star = WignerVector::from_raw(n, f_values);

    let y: Vec<f64> = (0..k).map(|a| solution.duals[a] - solution.duals[k + a]).collect();
    let f_lhs = vertices
        .iter()
        .map(|f| f.values().iter().zip(&y).map(|(v, c)| v * c).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let dual_witness = operator_from_dual(n, &y)?;

    let c = solution.objective;
    if c < -1e-9 {
        return Err(MssError::InvalidState(format!("negative Wigner distance {c}")));
    }
    let c_value = if c.abs() < ZERO_CLAMP { 0.0 } else { c.max(0.0) };
    Ok(MagicResult { c_value, f_star, mixture_weights, dual_witness, dual_coefficients: y, f_lhs })
}

/// (|sin φ| + |cos φ| − 1) / 2.
pub fn c_closed_form(phi: f64) -> f64 {
    ((phi.sin().abs() + phi.cos().abs() - 1.0) / 2.0).max(0.0)
}

/// Closest stabilizer-polytope point to the Wigner vector of P(φ)|+⟩ for φ ∈ (0, π/2).
///
/// The minimiser puts zero weight on the negative entry and matches the
/// other three from below, which fixes the mixture of |+⟩ and |+i⟩ with
/// weights `(1 ± (cos φ − sin φ)) / 2`.
pub fn optimal_mixture(phi: f64) -> Result<WignerVector> {
    if !(phi > 0.0 && phi < std::f64::consts::FRAC_PI_2) {
        return Err(MssError::InvalidArgument(format!("φ = {phi} outside the open interval (0, π/2)")));
    }
    let (c, s) = (phi.cos(), phi.sin());
    let b = BlochVector { x: (1.0 + c - s) / 2.0, y: (1.0 - c + s) / 2.0, z: 0.0 };
    wigner_of(&DensityMatrix::from_bloch(&b))
}

/// max(0, (|x| + |y| + |z| − 1) / 2): the single-qubit polytope is the octahedron ‖b‖₁ ≤ 1.
pub fn octahedron_distance(b: &BlochVector) -> f64 {
    ((b.l1_norm() - 1.0) / 2.0).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::PureState;
    use crate::stabilizer::stabilizer_set;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_8, PI};

    fn c_of(phi: f64) -> f64 {
        wigner_distance(&PureState::phase_plus(phi).to_density()).unwrap().c_value
    }

    #[test]
    fn reported_values() {
        assert_eq!(wigner_distance(&DensityMatrix::maximally_mixed(1)).unwrap().c_value, 0.0);
        assert!((c_of(FRAC_PI_4) - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        assert!((c_of(FRAC_PI_8) - 0.153281).abs() < 1e-6);
        assert!((c_of(FRAC_PI_3) - (3f64.sqrt() - 1.0) / 4.0).abs() < 1e-12);
        for s in stabilizer_set(1).unwrap().states() {
            assert!(wigner_distance(&s.to_density()).unwrap().c_value <= 1e-9);
        }
    }

    #[test]
    fn closed_form_values() {
        assert!((c_closed_form(FRAC_PI_4) - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert_eq!(c_closed_form(0.0), 0.0);
        assert!((c_closed_form(FRAC_PI_3) - 0.18301270189).abs() < 1e-10);
        for k in 0..8 {
            assert!(c_closed_form(k as f64 * FRAC_PI_2) < 1e-15);
            assert!((c_closed_form(0.3 + k as f64 * FRAC_PI_2) - c_closed_form(0.3)).abs() < 1e-14);
        }
    }

    #[test]
    fn optimal_mixture_attains_the_distance() {
        for &phi in &[FRAC_PI_8, FRAC_PI_4, 1.0, 1.5] {
            let w = wigner_of(&PureState::phase_plus(phi).to_density()).unwrap();
            let f = optimal_mixture(phi).unwrap();
            assert!((w.l1_distance(&f) - c_closed_form(phi)).abs() < 1e-12, "phi = {phi}");
        }
        let w = wigner_of(&PureState::phase_plus(FRAC_PI_8).to_density()).unwrap();
        assert!((w.l1_distance(&optimal_mixture(FRAC_PI_8).unwrap()) - 0.1532814824).abs() < 1e-9);
        assert!(optimal_mixture(0.0).is_err());
        assert!(optimal_mixture(FRAC_PI_2).is_err());
    }

    #[test]
    fn optimal_mixture_limits() {
        let plus = wigner_of(&PureState::plus().to_density()).unwrap();
        let plus_i = wigner_of(&PureState::phase_plus(FRAC_PI_2).to_density()).unwrap();
        let half: Vec<f64> = plus.values().iter().zip(plus_i.values()).map(|(a, b)| (a + b) / 2.0).collect();
        let at_quarter = optimal_mixture(FRAC_PI_4).unwrap();
        at_quarter.values().iter().zip(&half).for_each(|(a, b)| assert!((a - b).abs() < 1e-15));
        assert!(optimal_mixture(1e-9).unwrap().l1_distance(&plus) < 1e-8);
    }

    #[test]
    fn cos_sin_weighted_mixture_is_only_optimal_on_the_diagonal() {
        let mix = |phi: f64| -> WignerVector {
            let (c, s) = (phi.cos(), phi.sin());
            let b = BlochVector { x: c / (c + s), y: s / (c + s), z: 0.0 };
            wigner_of(&DensityMatrix::from_bloch(&b)).unwrap()
        };
        let dist = |phi: f64| wigner_of(&PureState::phase_plus(phi).to_density()).unwrap().l1_distance(&mix(phi));
        assert!((dist(FRAC_PI_4) - c_closed_form(FRAC_PI_4)).abs() < 1e-12);
        // At π/8 this mixture sits 0.2168 away, above the true minimum 0.1533.
        assert!((dist(FRAC_PI_8) - 0.216772751).abs() < 1e-8);
    }

    #[test]
    fn octahedron_examples() {
        assert_eq!(octahedron_distance(&BlochVector { x: 0.0, y: 0.0, z: 0.0 }), 0.0);
        let phi: f64 = 0.9;
        let b = BlochVector { x: phi.cos(), y: phi.sin(), z: 0.0 };
        assert!((octahedron_distance(&b) - c_closed_form(phi)).abs() < 1e-15);
        let r = 1.0 / 3f64.sqrt();
        let diag = BlochVector { x: r, y: r, z: r };
        let expected = (3f64.sqrt() - 1.0) / 2.0;
        assert!((octahedron_distance(&diag) - expected).abs() < 1e-15);
        let lp = wigner_distance(&DensityMatrix::from_bloch(&diag)).unwrap().c_value;
        assert!((lp - expected).abs() < 1e-9);
    }

    #[test]
    fn dual_witness_is_tight_at_the_solved_state() {
        for &phi in &[0.2, FRAC_PI_4, 2.0, 4.0, PI] {
            let rho = PureState::phase_plus(phi).to_density();
            let r = wigner_distance(&rho).unwrap();
            assert!((r.witness_at(&rho).unwrap() - r.c_value).abs() < 1e-9);
            assert!((r.f_star.l1_distance(&wigner_of(&rho).unwrap()) - r.c_value).abs() < 1e-9);
            for s in stabilizer_set(1).unwrap().states() {
                assert!(r.witness_trace(&s.to_density()).unwrap() <= r.f_lhs + 1e-9);
            }
            assert!(r.dual_witness.hermiticity_defect() < 1e-12);
            assert!(r.dual_coefficients.iter().all(|y| y.abs() <= 1.0 + 1e-9));
            let total: f64 = r.mixture_weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-12 && r.mixture_weights.iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn two_qubit_distance() {
        let set = stabilizer_set(2).unwrap();
        for s in set.states().iter().step_by(7) {
            assert!(wigner_distance(&s.to_density()).unwrap().c_value <= 1e-9);
        }
        assert_eq!(wigner_distance(&DensityMatrix::maximally_mixed(2)).unwrap().c_value, 0.0);
        let t = PureState::phase_plus(FRAC_PI_4);
        let tt = t.tensor(&t).to_density();
        let r = wigner_distance(&tt).unwrap();
        assert!(r.c_value > 0.0);
        assert!((r.witness_at(&tt).unwrap() - r.c_value).abs() < 1e-9);
        assert!(matches!(
            wigner_distance(&DensityMatrix::maximally_mixed(3)),
            Err(MssError::UnsupportedQubits(3))
        ));
    }
}
