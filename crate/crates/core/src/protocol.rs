//! The threshold magic-sharing protocol on an `n`-party GHZ state.
//!
//! Party 0 is the dealer, parties `1..n-2` are intermediates and party `n-1`
//! is the recipient. The dealer prepares GHZ_n, applies the phase gate to its
//! own qubit, then parties `0..n-2` measure X one after another and broadcast
//! their outcome. After each broadcast the recipient applies `Z` when the
//! outcome was `−`, so after `j` rounds the remaining register is
//! `(|0^{n-j}⟩ + e^{iφ}|1^{n-j}⟩)/√2` and the recipient ends with P(φ)|+⟩.
//!
//! Parties only hold their role and classical inbox; the quantum register is a
//! separate [`Register`] that plays the role of the physical world.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{MssError, Result};
use crate::magic::{c_closed_form, wigner_distance};
use crate::qcore::{unitarity_defect, BlochVector, Basis, DensityMatrix, PureState, Unitary1Q, C64};

pub const MIN_PARTIES: usize = 3;
pub const MAX_PARTIES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn bit(self) -> u8 {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }

    /// Parses a string such as `"+-+"`.
    pub fn parse_list(s: &str) -> Result<Vec<Outcome>> {
        s.chars()
            .map(|c| match c {
                '+' | '0' => Ok(Outcome::Plus),
                '-' | '1' => Ok(Outcome::Minus),
                other => Err(MssError::InvalidArgument(format!("outcome {other:?} is not one of + - 0 1"))),
            })
            .collect()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(if *self == Outcome::Plus { "+" } else { "-" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "role", content = "index", rename_all = "snake_case")]
pub enum PartyRole {
    Dealer,
    Intermediate(usize),
    Recipient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BroadcastMessage {
    pub sender: usize,
    pub outcome: Outcome,
    pub step: usize,
}

/// Which broadcasts the recipient corrects for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionConvention {
    /// `Z` after every `−` broadcast; the output is P(φ)|+⟩ in every branch.
    #[default]
    EveryBroadcast,
    /// Only the last intermediate's outcome is corrected (the circuit's `Z^{m_B}`).
    /// A dealer `−` then leaves P(φ+π)|+⟩, which carries the same magic.
    LastIntermediateOnly,
}

#[derive(Debug, Clone)]
pub enum OutcomeMode {
    Forced(Vec<Outcome>),
    Seeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorrectionRecord {
    pub step: usize,
    pub party: usize,
    pub in_response_to: usize,
    pub applied: bool,
}

/// State of the remaining register after one measurement round and its correction.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub measuring_party: usize,
    pub outcome: Outcome,
    pub probability: f64,
    #[serde(skip)]
    pub register: PureState,
    /// Party indices of the qubits still in the register, in register order.
    pub remaining_parties: Vec<usize>,
    #[serde(skip)]
    pub marginals: Vec<DensityMatrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolTranscript {
    pub phi: f64,
    pub n_parties: usize,
    pub convention: CorrectionConvention,
    pub messages: Vec<BroadcastMessage>,
    pub corrections: Vec<CorrectionRecord>,
    pub branch_probability: f64,
    pub final_state: DensityMatrix,
    #[serde(skip)]
    pub final_pure: PureState,
    pub final_bloch: BlochVector,
    /// Single-party marginals right after the phase injection, one per party.
    pub intermediate_marginals: Vec<DensityMatrix>,
    pub steps: Vec<StepRecord>,
}

impl ProtocolTranscript {
    pub fn outcomes(&self) -> Vec<Outcome> {
        self.messages.iter().map(|m| m.outcome).collect()
    }

    pub fn roles(&self) -> Vec<PartyRole> {
        (0..self.n_parties).map(|i| role_of(i, self.n_parties)).collect()
    }
}

fn role_of(index: usize, n: usize) -> PartyRole {
    if index == 0 {
        PartyRole::Dealer
    } else if index == n - 1 {
        PartyRole::Recipient
    } else {
        PartyRole::Intermediate(index)
    }
}

/// Classical side of a participant.
#[derive(Debug, Clone)]
struct Party {
    index: usize,
    role: PartyRole,
    inbox: Vec<BroadcastMessage>,
    convention: CorrectionConvention,
    n_parties: usize,
}

enum Action {
    ApplyZ,
    Nothing,
}

impl Party {
    fn receive(&mut self, msg: BroadcastMessage) -> Action {
        self.inbox.push(msg);
        if self.role != PartyRole::Recipient || msg.outcome == Outcome::Plus {
            return Action::Nothing;
        }
        match self.convention {
            CorrectionConvention::EveryBroadcast => Action::ApplyZ,
            CorrectionConvention::LastIntermediateOnly if msg.sender == self.n_parties - 2 => Action::ApplyZ,
            CorrectionConvention::LastIntermediateOnly => Action::Nothing,
        }
    }
}

/// The shared quantum register; qubit positions track which party owns them.
#[derive(Debug, Clone)]
pub struct Register {
    state: PureState,
    owners: Vec<usize>,
}

impl Register {
    fn position(&self, party: usize) -> Result<usize> {
        self.owners
            .iter()
            .position(|&o| o == party)
            .ok_or(MssError::IndexOutOfRange { index: party, n_qubits: self.owners.len() })
    }

    fn apply(&mut self, party: usize, gate: &Unitary1Q) -> Result<()> {
        self.state = self.state.apply_1q(gate, self.position(party)?)?;
        Ok(())
    }

    fn cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.state = self.state.apply_cx(self.position(control)?, self.position(target)?)?;
        Ok(())
    }

    fn measure(&mut self, party: usize, basis: Basis, outcome: Outcome) -> Result<f64> {
        let pos = self.position(party)?;
        let (p, rest) = self.state.project_measure(pos, basis, outcome.bit())?;
        self.state = rest;
        self.owners.remove(pos);
        Ok(p)
    }

    fn probability(&self, party: usize, basis: Basis, outcome: Outcome) -> Result<f64> {
        match self.state.project_measure(self.position(party)?, basis, outcome.bit()) {
            Ok((p, _)) => Ok(p),
            Err(MssError::ImpossibleBranch(_)) => Ok(0.0),
            Err(e) => Err(e),
        }
    }

    fn marginals(&self) -> Result<Vec<DensityMatrix>> {
        let rho = self.state.to_density();
        (0..self.owners.len()).map(|q| rho.partial_trace(&[q])).collect()
    }
}

fn check_parties(n: usize) -> Result<()> {
    if !(MIN_PARTIES..=MAX_PARTIES).contains(&n) {
        return Err(MssError::InvalidArgument(format!("party count {n} outside {MIN_PARTIES}..={MAX_PARTIES}")));
    }
    Ok(())
}

/// Runs the protocol with an arbitrary dealer gate. `phi` only labels the transcript.
pub fn run_with_gate(
    gate: &Unitary1Q,
    phi: f64,
    n: usize,
    mode: &OutcomeMode,
    convention: CorrectionConvention,
) -> Result<ProtocolTranscript> {
    check_parties(n)?;
    if let OutcomeMode::Forced(list) = mode {
        if list.len() != n - 1 {
            return Err(MssError::InvalidArgument(format!(
                "expected {} forced outcomes, got {}",
                n - 1,
                list.len()
            )));
        }
    }
    let mut rng = match mode {
        OutcomeMode::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        OutcomeMode::Forced(_) => None,
    };

    let mut parties: Vec<Party> = (0..n)
        .map(|index| Party { index, role: role_of(index, n), inbox: vec![], convention, n_parties: n })
        .collect();
    let recipient = n - 1;
    let mut reg = Register { state: PureState::zero(n)?, owners: (0..n).collect() };

    // Step 1: GHZ_n.
    reg.apply(0, &Unitary1Q::hadamard())?;
    for k in 1..n {
        reg.cx(0, k)?;
    }
    // Step 2: phase injection on the dealer's qubit.
    reg.apply(0, gate)?;
    let intermediate_marginals = reg.marginals()?;

    let mut messages = Vec::with_capacity(n - 1);
    let mut corrections = Vec::new();
    let mut steps = Vec::with_capacity(n - 1);
    let mut branch_probability = 1.0;
    for j in 0..n - 1 {
        let step = 3 + j;
        let outcome = match (mode, rng.as_mut()) {
            (OutcomeMode::Forced(list), _) => list[j],
            (OutcomeMode::Seeded(_), Some(rng)) => {
                let p_plus = reg.probability(parties[j].index, Basis::X, Outcome::Plus)?;
                if rng.random::<f64>() < p_plus {
                    Outcome::Plus
                } else {
                    Outcome::Minus
                }
            }
            (OutcomeMode::Seeded(_), None) => unreachable!("seeded mode always carries an rng"),
        };
        let p = reg.measure(parties[j].index, Basis::X, outcome)?;
        branch_probability *= p;
        let msg = BroadcastMessage { sender: j, outcome, step };
        messages.push(msg);
        for party in parties.iter_mut().skip(j + 1) {
            let applied = match party.receive(msg) {
                Action::ApplyZ => {
                    reg.apply(party.index, &Unitary1Q::pauli_z())?;
                    true
                }
                Action::Nothing => false,
            };
            if party.index == recipient {
                corrections.push(CorrectionRecord { step, party: recipient, in_response_to: j, applied });
            }
        }
        steps.push(StepRecord {
            step,
            measuring_party: j,
            outcome,
            probability: p,
            register: reg.state.clone(),
            remaining_parties: reg.owners.clone(),
            marginals: reg.marginals()?,
        });
    }

    let final_pure = reg.state.clone();
    let final_state = final_pure.to_density();
    let final_bloch = final_state.bloch()?;
    Ok(ProtocolTranscript {
        phi,
        n_parties: n,
        convention,
        messages,
        corrections,
        branch_probability,
        final_state,
        final_pure,
        final_bloch,
        intermediate_marginals,
        steps,
    })
}

/// One run with the phase gate P(φ). `None` runs the all-`+` branch.
pub fn run_exact(phi: f64, n: usize, outcomes: Option<&[Outcome]>) -> Result<ProtocolTranscript> {
    let forced = outcomes.map(<[Outcome]>::to_vec).unwrap_or_else(|| vec![Outcome::Plus; n.saturating_sub(1)]);
    run_with_gate(&Unitary1Q::phase(phi), phi, n, &OutcomeMode::Forced(forced), CorrectionConvention::EveryBroadcast)
}

/// One run with outcomes sampled from the Born rule.
pub fn run_sampled(phi: f64, n: usize, seed: u64) -> Result<ProtocolTranscript> {
    run_with_gate(&Unitary1Q::phase(phi), phi, n, &OutcomeMode::Seeded(seed), CorrectionConvention::EveryBroadcast)
}

/// All `2^{n-1}` outcome patterns, in binary order with `+` as 0 and the first party most significant.
pub fn outcome_patterns(n_measurements: usize) -> Vec<Vec<Outcome>> {
    (0..1usize << n_measurements)
        .map(|mask| {
            (0..n_measurements)
                .map(|j| Outcome::from_bit(((mask >> (n_measurements - 1 - j)) & 1) as u8))
                .collect()
        })
        .collect()
}

fn branches_with_gate(
    gate: &Unitary1Q,
    phi: f64,
    n: usize,
    convention: CorrectionConvention,
) -> Result<Vec<ProtocolTranscript>> {
    check_parties(n)?;
    let mut out = Vec::new();
    for pattern in outcome_patterns(n - 1) {
        match run_with_gate(gate, phi, n, &OutcomeMode::Forced(pattern), convention) {
            Ok(t) => out.push(t),
            Err(MssError::ImpossibleBranch(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn run_all_branches(phi: f64, n: usize) -> Result<Vec<ProtocolTranscript>> {
    branches_with_gate(&Unitary1Q::phase(phi), phi, n, CorrectionConvention::EveryBroadcast)
}

pub fn run_all_branches_with(phi: f64, n: usize, convention: CorrectionConvention) -> Result<Vec<ProtocolTranscript>> {
    branches_with_gate(&Unitary1Q::phase(phi), phi, n, convention)
}

#[derive(Debug, Clone, Serialize)]
pub struct PartySecurity {
    pub party: usize,
    pub role: PartyRole,
    pub marginal: DensityMatrix,
    pub c_value: f64,
    pub trace_distance_to_i2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecurityReport {
    pub parties: Vec<PartySecurity>,
    /// Largest deviation from I/2 over every single-party marginal of every
    /// intermediate register that still holds at least two qubits.
    pub max_intermediate_trace_distance: f64,
}

impl SecurityReport {
    pub fn secure(&self, tol: f64) -> bool {
        self.parties.iter().all(|p| p.trace_distance_to_i2 <= tol && p.c_value <= 1e-9)
            && self.max_intermediate_trace_distance <= tol
    }
}

/// Magic and distance to I/2 of every non-recipient party's view.
pub fn security_report(transcript: &ProtocolTranscript) -> Result<SecurityReport> {
    let i2 = DensityMatrix::maximally_mixed(1);
    let n = transcript.n_parties;
    let parties = transcript
        .intermediate_marginals
        .iter()
        .enumerate()
        .take(n - 1)
        .map(|(party, marginal)| {
            Ok(PartySecurity {
                party,
                role: role_of(party, n),
                marginal: marginal.clone(),
                c_value: wigner_distance(marginal)?.c_value,
                trace_distance_to_i2: marginal.trace_distance(&i2)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for step in transcript.steps.iter().filter(|s| s.remaining_parties.len() >= 2) {
        for m in &step.marginals {
            worst = worst.max(m.trace_distance(&i2)?);
        }
    }
    Ok(SecurityReport { parties, max_intermediate_trace_distance: worst })
}

/// (|G₀₀ + G₁₀|, |G₀₁ + G₁₁|) for any 2×2 matrix.
pub fn column_sums(m: &[[C64; 2]; 2]) -> (f64, f64) {
    ((m[0][0] + m[1][0]).norm(), (m[0][1] + m[1][1]).norm())
}

/// Both column sums have modulus 1 within 1e-10.
pub fn column_sum_condition(m: &[[C64; 2]; 2]) -> bool {
    let (a, b) = column_sums(m);
    (a - 1.0).abs() <= 1e-10 && (b - 1.0).abs() <= 1e-10
}

/// The middle party's marginal after the dealer's gate and a `+` outcome on the dealer's X measurement.
pub fn middle_marginal_after_dealer_plus(gate: &Unitary1Q) -> Result<DensityMatrix> {
    let psi = PureState::ghz_with_phase(3, 0.0)?.apply_1q(gate, 0)?;
    let (_, rest) = psi.project_measure(0, Basis::X, 0)?;
    rest.to_density().partial_trace(&[0])
}

#[derive(Debug, Clone, Serialize)]
pub struct GateProbe {
    pub phi: f64,
    pub col0_sum_abs: f64,
    pub col1_sum_abs: f64,
    /// Branch-probability-weighted recipient magic.
    pub recipient_c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateAdmissibility {
    /// Gate at the first probe, row-major `[re, im]` pairs.
    pub gate: [[f64; 2]; 4],
    pub col0_sum_abs: f64,
    pub col1_sum_abs: f64,
    pub secure: bool,
    pub faithful: bool,
    pub probes: Vec<GateProbe>,
}

/// Column-sum security and recipient faithfulness for a φ-indexed gate family on the (2,3) protocol.
///
/// `secure` requires the column-sum condition at every probe. `faithful`
/// requires the recipient's magic to exceed 1e-6 somewhere and to vary across
/// the probes, so a constant family is never faithful.
pub fn check_gate_admissibility<F>(family: F, probe_phis: &[f64]) -> Result<GateAdmissibility>
where
    F: Fn(f64) -> Unitary1Q,
{
    let first = *probe_phis
        .first()
        .ok_or_else(|| MssError::InvalidArgument("at least one probe angle is required".into()))?;
    let mut probes = Vec::with_capacity(probe_phis.len());
    for &phi in probe_phis {
        let gate = family(phi);
        let m = gate.matrix();
        let dev = unitarity_defect(&m);
        if dev > 1e-10 {
            return Err(MssError::NonUnitary(dev));
        }
        let (col0, col1) = column_sums(&m);
        let branches = branches_with_gate(&gate, phi, 3, CorrectionConvention::EveryBroadcast)?;
        let mut recipient_c = 0.0;
        for t in &branches {
            recipient_c += t.branch_probability * wigner_distance(&t.final_state)?.c_value;
        }
        probes.push(GateProbe { phi, col0_sum_abs: col0, col1_sum_abs: col1, recipient_c });
    }
    let worst = probes
        .iter()
        .max_by(|a, b| {
            let da = (a.col0_sum_abs - 1.0).abs().max((a.col1_sum_abs - 1.0).abs());
            let db = (b.col0_sum_abs - 1.0).abs().max((b.col1_sum_abs - 1.0).abs());
            da.total_cmp(&db)
        })
        .expect("non-empty probes");
    let secure = probes
        .iter()
        .all(|p| (p.col0_sum_abs - 1.0).abs() <= 1e-10 && (p.col1_sum_abs - 1.0).abs() <= 1e-10);
    let max_c = probes.iter().map(|p| p.recipient_c).fold(f64::NEG_INFINITY, f64::max);
    let min_c = probes.iter().map(|p| p.recipient_c).fold(f64::INFINITY, f64::min);
    let faithful = max_c > 1e-6 && max_c - min_c > 1e-6;
    let m = family(first).matrix();
    let gate = [
        [m[0][0].re, m[0][0].im],
        [m[0][1].re, m[0][1].im],
        [m[1][0].re, m[1][0].im],
        [m[1][1].re, m[1][1].im],
    ];
    Ok(GateAdmissibility {
        gate,
        col0_sum_abs: worst.col0_sum_abs,
        col1_sum_abs: worst.col1_sum_abs,
        secure,
        faithful,
        probes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub phi: f64,
    pub c_theory: f64,
    pub c_protocol: f64,
}

/// Closed-form magic against the LP value of the recipient's exact output.
pub fn magic_scan(phi_grid: &[f64], n: usize) -> Result<Vec<ScanRow>> {
    if phi_grid.is_empty() {
        return Err(MssError::InvalidArgument("empty φ grid".into()));
    }
    phi_grid
        .iter()
        .map(|&phi| {
            let t = run_exact(phi, n, None)?;
            Ok(ScanRow { phi, c_theory: c_closed_form(phi), c_protocol: wigner_distance(&t.final_state)?.c_value })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_8, PI};

    const P: Outcome = Outcome::Plus;
    const M: Outcome = Outcome::Minus;

    #[test]
    fn t_state_delivered_in_plus_plus_branch() {
        let t = run_exact(FRAC_PI_4, 3, Some(&[P, P])).unwrap();
        assert!(t.final_state.fidelity(&PureState::phase_plus(FRAC_PI_4)).unwrap() > 1.0 - 1e-12);
        let c = wigner_distance(&t.final_state).unwrap().c_value;
        assert!((c - 0.207107).abs() < 1e-6);
        assert!((t.branch_probability - 0.25).abs() < 1e-12);
    }

    #[test]
    fn minus_outcome_is_corrected() {
        let a = run_exact(FRAC_PI_4, 3, Some(&[P, P])).unwrap();
        let b = run_exact(FRAC_PI_4, 3, Some(&[P, M])).unwrap();
        assert!(a.final_state.trace_distance(&b.final_state).unwrap() < 1e-12);
        assert_eq!(b.corrections.iter().filter(|c| c.applied).count(), 1);
        assert!(b.corrections.iter().all(|c| c.party == 2));
    }

    #[test]
    fn six_parties_all_branches() {
        let branches = run_all_branches(FRAC_PI_3, 6).unwrap();
        assert_eq!(branches.len(), 32);
        let target = PureState::phase_plus(FRAC_PI_3);
        for t in &branches {
            assert!((t.branch_probability - 1.0 / 32.0).abs() < 1e-12);
            assert!(t.final_state.fidelity(&target).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn branch_counts_and_zeros() {
        let b = run_all_branches(0.3, 3).unwrap();
        assert_eq!(b.len(), 4);
        assert!((b.iter().map(|t| t.branch_probability).sum::<f64>() - 1.0).abs() < 1e-12);
        for t in run_all_branches(FRAC_PI_8, 4).unwrap() {
            assert!((wigner_distance(&t.final_state).unwrap().c_value - 0.153281).abs() < 1e-6);
        }
        for t in run_all_branches(FRAC_PI_2, 3).unwrap() {
            assert!(wigner_distance(&t.final_state).unwrap().c_value <= 1e-9);
        }
    }

    #[test]
    fn literal_circuit_convention_keeps_magic_but_not_the_state() {
        let phi = 0.6;
        for t in run_all_branches_with(phi, 3, CorrectionConvention::LastIntermediateOnly).unwrap() {
            let c = wigner_distance(&t.final_state).unwrap().c_value;
            assert!((c - c_closed_form(phi)).abs() < 1e-9);
            let expected_phase = if t.outcomes()[0] == M { phi + PI } else { phi };
            assert!(t.final_state.fidelity(&PureState::phase_plus(expected_phase)).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(run_exact(0.3, 2, None).is_err());
        assert!(run_exact(0.3, 7, None).is_err());
        assert!(run_exact(0.3, 3, Some(&[P])).is_err());
        assert!(magic_scan(&[], 3).is_err());
        assert!(check_gate_admissibility(Unitary1Q::phase, &[]).is_err());
    }

    #[test]
    fn sampled_runs_are_deterministic_and_valid() {
        let a = run_sampled(1.0, 5, 42).unwrap();
        let b = run_sampled(1.0, 5, 42).unwrap();
        assert_eq!(a.outcomes(), b.outcomes());
        assert!(a.final_state.fidelity(&PureState::phase_plus(1.0)).unwrap() > 1.0 - 1e-12);
        let patterns: std::collections::HashSet<Vec<Outcome>> =
            (0..64).map(|s| run_sampled(1.0, 4, s).unwrap().outcomes()).collect();
        assert!(patterns.len() > 4);
    }

    #[test]
    fn security_examples() {
        let t = run_exact(1.1, 3, None).unwrap();
        let report = security_report(&t).unwrap();
        assert_eq!(report.parties.len(), 2);
        assert!(report.secure(1e-12));
        let bob = |phi: f64| run_exact(phi, 3, None).unwrap().intermediate_marginals[1].clone();
        assert!(bob(FRAC_PI_8).trace_distance(&bob(3.0 * FRAC_PI_4)).unwrap() < 1e-12);
        // Five parties: after two rounds the three remaining marginals are all I/2.
        let t = run_exact(0.7, 5, Some(&[M, P, M, P])).unwrap();
        let i2 = DensityMatrix::maximally_mixed(1);
        assert_eq!(t.steps[1].marginals.len(), 3);
        for m in &t.steps[1].marginals {
            assert!(m.trace_distance(&i2).unwrap() < 1e-12);
        }
    }

    #[test]
    fn roles_and_messages() {
        let t = run_exact(0.2, 4, Some(&[P, M, P])).unwrap();
        assert_eq!(t.roles(), vec![PartyRole::Dealer, PartyRole::Intermediate(1), PartyRole::Intermediate(2), PartyRole::Recipient]);
        assert_eq!(t.messages.iter().map(|m| m.step).collect::<Vec<_>>(), vec![3, 4, 5]);
        assert_eq!(t.messages.iter().map(|m| m.sender).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn gate_admissibility_examples() {
        let probes: Vec<f64> = (1..8).map(|k| k as f64 * 0.37).collect();
        let phase = check_gate_admissibility(Unitary1Q::phase, &probes).unwrap();
        assert!(phase.secure && phase.faithful);
        let xrot = check_gate_admissibility(|phi| Unitary1Q::exp_ix(phi / 2.0), &probes).unwrap();
        assert!(xrot.secure && !xrot.faithful);
        assert!(xrot.probes.iter().all(|p| p.recipient_c <= 1e-9));
        let non_unitary = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.9, 0.0)]];
        assert!(!column_sum_condition(&non_unitary));
        let h = check_gate_admissibility(|_| Unitary1Q::hadamard(), &probes).unwrap();
        assert!(!h.secure && !h.faithful);
    }

    #[test]
    fn scan_examples() {
        let rows = magic_scan(&[FRAC_PI_8, 3.0 * FRAC_PI_4, PI], 3).unwrap();
        assert!((rows[0].c_theory - 0.15328).abs() < 1e-5);
        assert!((rows[1].c_protocol - 0.20711).abs() < 1e-5);
        assert!(rows[2].c_theory.abs() < 1e-12 && rows[2].c_protocol <= 1e-9);
        rows.iter().for_each(|r| assert!((r.c_theory - r.c_protocol).abs() <= 1e-7));
    }
}
