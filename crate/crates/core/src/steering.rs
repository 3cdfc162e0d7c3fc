//! Steering-based certification of the recipient's magic.
//!
//! After Bob's `+` outcome, Alice and Charlie share `(|00⟩ + e^{iφ}|11⟩)/√2`.
//! Alice measures X or Y and Charlie is left with the conditional states
//! `σ̃_{a|x}`. The functional
//!
//! ```text
//! F = ½ [ tr(H_X σ̃_{0|X}) + tr(H_Y σ̃_{0|Y}) ]
//! ```
//!
//! is bounded by `F_LHS` for every stabilizer local-hidden-state model. `H_X`
//! is the LP dual witness solved at `σ̃_{0|X}`. Since `σ̃_{a|Y} = S† σ̃_{a|X} S`,
//! the Y term uses `H_Y = S† H_X S`, which has the same maximum over
//! stabilizer states, and the gap `F − F_LHS` equals the magic of `σ̃_{0|X}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MssError, Result};
use crate::magic::wigner_distance;
use crate::qcore::{Basis, DensityMatrix, Operator, PureState, Unitary1Q};
use crate::stabilizer::stabilizer_set;
use crate::tomo::{self, MarginalCounts, NoiseModel, TargetDetail, TomoTarget};

pub const STEERING_SETTINGS: [Basis; 2] = [Basis::X, Basis::Y];

#[derive(Debug, Clone, Serialize)]
pub struct AssemblageMember {
    pub setting: Basis,
    pub outcome: u8,
    pub probability: f64,
    pub state: DensityMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct Assemblage {
    members: Vec<AssemblageMember>,
}

impl Assemblage {
    /// Per setting, outcome probabilities must sum to 1 within 1e-12.
    pub fn new(members: Vec<AssemblageMember>) -> Result<Self> {
        let assemblage = Self { members };
        for setting in assemblage.settings() {
            let total: f64 = assemblage.members.iter().filter(|m| m.setting == setting).map(|m| m.probability).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(MssError::InvalidArgument(format!("setting {setting} probabilities sum to {total}")));
            }
        }
        if assemblage.members.iter().any(|m| m.state.n_qubits() != 1 || m.probability < 0.0) {
            return Err(MssError::InvalidArgument("members must be single-qubit states with p ≥ 0".into()));
        }
        Ok(assemblage)
    }

    pub fn members(&self) -> &[AssemblageMember] {
        &self.members
    }

    pub fn settings(&self) -> Vec<Basis> {
        let mut s: Vec<Basis> = self.members.iter().map(|m| m.setting).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn member(&self, setting: Basis, outcome: u8) -> Option<&AssemblageMember> {
        self.members.iter().find(|m| m.setting == setting && m.outcome == outcome)
    }

    fn state(&self, setting: Basis, outcome: u8) -> Result<&DensityMatrix> {
        self.member(setting, outcome)
            .map(|m| &m.state)
            .ok_or_else(|| MssError::MissingSetting(format!("no member for setting {setting}, outcome {outcome}")))
    }

    /// Charlie's reduced state `Σ_a p(a|x) σ̃_{a|x}` for one setting.
    pub fn reduced_state(&self, setting: Basis) -> Result<DensityMatrix> {
        let parts: Vec<(f64, &DensityMatrix)> = self
            .members
            .iter()
            .filter(|m| m.setting == setting)
            .map(|m| (m.probability, &m.state))
            .collect();
        if parts.is_empty() {
            return Err(MssError::MissingSetting(setting.to_string()));
        }
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let normalised: Vec<(f64, &DensityMatrix)> = parts.iter().map(|&(w, r)| (w / total, r)).collect();
        DensityMatrix::mixture(&normalised)
    }

    /// Largest entrywise difference between reduced states of different settings.
    pub fn no_signalling_defect(&self) -> Result<f64> {
        let reduced = self.settings().into_iter().map(|s| self.reduced_state(s)).collect::<Result<Vec<_>>>()?;
        let mut worst: f64 = 0.0;
        for (i, a) in reduced.iter().enumerate() {
            for b in &reduced[i + 1..] {
                worst = worst.max(a.as_operator().max_abs_diff(b.as_operator())?);
            }
        }
        Ok(worst)
    }
}

/// Alice–Charlie state after the protocol's dealer phase and Bob's `+` outcome.
fn alice_charlie_state(phi: f64) -> Result<PureState> {
    let psi = PureState::ghz_with_phase(3, 0.0)?.apply_1q(&Unitary1Q::phase(phi), 0)?;
    Ok(psi.project_measure(1, Basis::X, 0)?.1)
}

/// Charlie's normalised states and probabilities for Alice's X and Y settings.
///
/// No correction is applied to Alice's outcome, so the assemblage is no-signalling.
pub fn build_assemblage(phi: f64) -> Result<Assemblage> {
    let ac = alice_charlie_state(phi)?;
    let mut members = Vec::with_capacity(4);
    for setting in STEERING_SETTINGS {
        for outcome in 0..2u8 {
            let (probability, charlie) = ac.project_measure(0, setting, outcome)?;
            members.push(AssemblageMember { setting, outcome, probability, state: charlie.to_density() });
        }
    }
    Assemblage::new(members)
}

/// Charlie's state when Alice measures Z and obtains 0.
pub fn z_setting_probe(phi: f64) -> Result<DensityMatrix> {
    Ok(alice_charlie_state(phi)?.project_measure(0, Basis::Z, 0)?.1.to_density())
}

/// Witness pair `(H_X, H_Y)` with their common stabilizer bound.
#[derive(Debug, Clone, Serialize)]
pub struct SteeringWitness {
    pub h_x: Operator,
    pub h_y: Operator,
    pub f_lhs: f64,
}

/// max over the six single-qubit stabilizer states of `tr(Hσ)`.
pub fn lhs_bound_check(h: &Operator) -> Result<f64> {
    let set = stabilizer_set(1)?;
    let mut best = f64::NEG_INFINITY;
    for s in set.states() {
        best = best.max(s.to_density().expectation(h)?);
    }
    Ok(best)
}

/// Solves the LP once at `σ̃_{0|X}` taken from the assemblage.
pub fn witness_from_assemblage(assemblage: &Assemblage) -> Result<SteeringWitness> {
    witness_for_state(assemblage.state(Basis::X, 0)?)
}

fn witness_for_state(sigma_x: &DensityMatrix) -> Result<SteeringWitness> {
    let solved = wigner_distance(sigma_x)?;
    let h_x = solved.dual_witness;
    let h_y = h_x.conjugate_1q(&Unitary1Q::s_dagger(), 0)?;
    let bound_y = lhs_bound_check(&h_y)?;
    if (bound_y - solved.f_lhs).abs() > 1e-9 {
        return Err(MssError::InvalidState(format!(
            "rotated witness bound {bound_y} differs from F_LHS {}",
            solved.f_lhs
        )));
    }
    Ok(SteeringWitness { h_x, h_y, f_lhs: solved.f_lhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificationRecord {
    pub f_value: f64,
    pub f_lhs: f64,
    pub gap: f64,
    /// Gap clipped at zero: the certified lower bound on the recipient's magic.
    pub certified_c: f64,
    /// φ never enters the evaluation, only the assemblage states.
    pub phi_hidden: bool,
}

fn record(f_value: f64, f_lhs: f64) -> CertificationRecord {
    let gap = f_value - f_lhs;
    let certified_c = if gap > 1e-10 { gap } else { 0.0 };
    CertificationRecord { f_value, f_lhs, gap, certified_c, phi_hidden: true }
}

pub fn evaluate_functional(assemblage: &Assemblage, witness: &SteeringWitness) -> Result<CertificationRecord> {
    let sx = assemblage.state(Basis::X, 0)?;
    let sy = assemblage.state(Basis::Y, 0)?;
    let f = 0.5 * (sx.expectation(&witness.h_x)? + sy.expectation(&witness.h_y)?);
    Ok(record(f, witness.f_lhs))
}

/// Exact certification of the ideal assemblage for φ.
pub fn certify(phi: f64) -> Result<CertificationRecord> {
    let a = build_assemblage(phi)?;
    let w = witness_from_assemblage(&a)?;
    evaluate_functional(&a, &w)
}

#[derive(Debug, Clone, Serialize)]
pub struct SampledCertification {
    pub record: CertificationRecord,
    pub sigma_gap: f64,
    pub assemblage: Assemblage,
    pub x_setting: TargetDetail,
    pub y_setting: TargetDetail,
}

fn marginal_assemblage_member(
    setting: Basis,
    outcome: u8,
    detail: &TargetDetail,
) -> Result<(f64, DensityMatrix)> {
    let m = detail
        .counts
        .iter()
        .map(|c| tomo::post_select_on(c, outcome))
        .collect::<Result<Vec<_>>>()?;
    let r = tomo::reconstruct(&m[0], &m[1], &m[2], None)
        .map_err(|e| MssError::EmptySample(format!("setting {setting}, outcome {outcome}: {e}")))?;
    let shots: u64 = detail.counts.iter().map(|c| c.shots).sum();
    let kept: u64 = m.iter().map(MarginalCounts::n_eff).sum();
    Ok((kept as f64 / shots as f64, r.rho))
}

/// Finite-shot certification from reconstructed conditional states, with a
/// parametric-bootstrap standard deviation of the gap at a fixed witness.
pub fn certify_sampled(
    phi: f64,
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
    n_boot: usize,
) -> Result<SampledCertification> {
    if n_boot < tomo::MIN_BOOTSTRAP {
        return Err(MssError::InvalidArgument(format!("n_boot {n_boot} is below {}", tomo::MIN_BOOTSTRAP)));
    }
    let x_setting = tomo::tomography(phi, TomoTarget::Charlie, Basis::X, shots, noise, seed)?;
    let y_setting = tomo::tomography(phi, TomoTarget::Charlie, Basis::Y, shots, noise, seed)?;

    let mut members = Vec::with_capacity(4);
    for (setting, detail) in [(Basis::X, &x_setting), (Basis::Y, &y_setting)] {
        let (p0, s0) = marginal_assemblage_member(setting, 0, detail)?;
        let (_, s1) = marginal_assemblage_member(setting, 1, detail)?;
        members.push(AssemblageMember { setting, outcome: 0, probability: p0, state: s0 });
        members.push(AssemblageMember { setting, outcome: 1, probability: 1.0 - p0, state: s1 });
    }
    let assemblage = Assemblage::new(members)?;
    let witness = witness_from_assemblage(&assemblage)?;
    let record = evaluate_functional(&assemblage, &witness)?;

    let tag = tomo::stream_id(&[phi.to_bits(), 0x57ee]);
    let gaps = (0..n_boot)
        .into_par_iter()
        .map(|r| {
            let mut rng = tomo::rng_for(seed, tomo::stream_id(&[tag, r as u64]));
            let mut f = 0.0;
            for (detail, h) in [(&x_setting, &witness.h_x), (&y_setting, &witness.h_y)] {
                let m = &detail.marginals;
                let s = [
                    tomo::resample(&mut rng, &m[0])?,
                    tomo::resample(&mut rng, &m[1])?,
                    tomo::resample(&mut rng, &m[2])?,
                ];
                f += 0.5 * tomo::reconstruct(&s[0], &s[1], &s[2], None)?.rho.expectation(h)?;
            }
            Ok(f - witness.f_lhs)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (gaps.len() - 1) as f64;
    Ok(SampledCertification { record, sigma_gap: var.sqrt(), assemblage, x_setting, y_setting })
}
