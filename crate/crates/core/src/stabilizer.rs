//! Pure stabilizer states for one and two qubits, and the vertex set of the
//! stabilizer polytope in Wigner space.

use std::sync::OnceLock;

use crate::error::{MssError, Result};
use crate::qcore::{Operator, PureState, Unitary1Q, C64};
use crate::wigner::{wigner_of, WignerVector};

/// Stabilizer states of a 1- or 2-qubit register, sorted by Wigner vector.
#[derive(Debug, Clone)]
pub struct StabilizerSet {
    n_qubits: usize,
    states: Vec<PureState>,
    labels: Vec<String>,
    wigner_vertices: Vec<WignerVector>,
}

impl StabilizerSet {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    /// Stabilizer generators that define each state, e.g. `+X` or `+XX,-ZZ`.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn wigner_vertices(&self) -> &[WignerVector] {
        &self.wigner_vertices
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Expected count 2^n ∏_{k=1..n} (2^k + 1).
pub fn stabilizer_count(n_qubits: u32) -> usize {
    (1..=n_qubits).fold(1usize << n_qubits, |acc, k| acc * ((1usize << k) + 1))
}

fn pauli(label: char) -> Unitary1Q {
    match label {
        'X' => Unitary1Q::pauli_x(),
        'Y' => Unitary1Q::pauli_y(),
        'Z' => Unitary1Q::pauli_z(),
        _ => Unitary1Q::identity(),
    }
}

fn pauli_string(labels: &str) -> Operator {
    let mut chars = labels.chars();
    let first = Operator::from_unitary(&pauli(chars.next().expect("non-empty label")));
    chars.fold(first, |acc, c| acc.kron(&Operator::from_unitary(&pauli(c))))
}

fn all_pauli_labels(n_qubits: usize) -> Vec<String> {
    let mut labels = vec![String::new()];
    for _ in 0..n_qubits {
        labels = labels
            .iter()
            .flat_map(|prefix| "IXYZ".chars().map(move |c| format!("{prefix}{c}")))
            .collect();
    }
    labels.retain(|l| l.chars().any(|c| c != 'I'));
    labels
}

/// Makes the first nonzero amplitude real and positive.
fn canonical_phase(amps: &mut [C64]) {
    if let Some(first) = amps.iter().find(|a| a.norm() > 1e-9).copied() {
        let phase = first / first.norm();
        amps.iter_mut().for_each(|a| *a /= phase);
    }
}

/// Unit vector spanning the range of a rank-1 projector.
fn projector_state(n_qubits: usize, proj: &Operator) -> Result<PureState> {
    let dim = proj.dim();
    let col = (0..dim)
        .max_by(|&a, &b| proj.get(a, a).re.total_cmp(&proj.get(b, b).re))
        .expect("non-empty");
    let mut amps: Vec<C64> = (0..dim).map(|r| proj.get(r, col)).collect();
    canonical_phase(&mut amps);
    PureState::normalized(n_qubits, amps)
}

fn signed_label(sign: f64, label: &str) -> String {
    format!("{}{label}", if sign > 0.0 { '+' } else { '-' })
}

fn brute_force(n_qubits: usize) -> Result<StabilizerSet> {
    let identity = Operator::identity(n_qubits);
    let paulis: Vec<(String, Operator)> =
        all_pauli_labels(n_qubits).into_iter().map(|l| { let op = pauli_string(&l); (l, op) }).collect();

    // Each candidate is a list of signed, independent, commuting generators.
    let mut candidates: Vec<(String, Operator)> = Vec::new();
    match n_qubits {
        1 => {
            for (label, p) in &paulis {
                for sign in [1.0, -1.0] {
                    let proj = identity.add(&p.scale(sign))?.scale(0.5);
                    candidates.push((signed_label(sign, label), proj));
                }
            }
        }
        2 => {
            for (i, (la, a)) in paulis.iter().enumerate() {
                for (lb, b) in paulis.iter().skip(i + 1) {
                    let ab = a.matmul(b)?;
                    if ab.max_abs_diff(&b.matmul(a)?)? > 1e-12 {
                        continue;
                    }
                    for sa in [1.0, -1.0] {
                        for sb in [1.0, -1.0] {
                            let pa = identity.add(&a.scale(sa))?;
                            let pb = identity.add(&b.scale(sb))?;
                            let proj = pa.matmul(&pb)?.scale(0.25);
                            let label = format!("{},{}", signed_label(sa, la), signed_label(sb, lb));
                            candidates.push((label, proj));
                        }
                    }
                }
            }
        }
        n => return Err(MssError::UnsupportedQubits(n)),
    }

    let mut found: Vec<(String, PureState)> = Vec::new();
    for (label, proj) in candidates {
        // A projector from two commuting independent generators has rank 1 exactly.
        if (proj.trace().re - 1.0).abs() > 1e-9 {
            continue;
        }
        let state = projector_state(n_qubits, &proj)?;
        let duplicate = found
            .iter()
            .any(|(_, s)| s.overlap(&state).map(|f| f > 1.0 - 1e-10).unwrap_or(false));
        if !duplicate {
            found.push((label, state));
        }
    }

    let mut rows: Vec<(Vec<i64>, String, PureState, WignerVector)> = found
        .into_iter()
        .map(|(label, state)| {
            let w = wigner_of(&state.to_density())?;
            let key = w.values().iter().map(|v| (v * 1e12).round() as i64).collect();
            Ok((key, label, state, w))
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0));

    let mut set = StabilizerSet { n_qubits, states: vec![], labels: vec![], wigner_vertices: vec![] };
    for (_, label, state, w) in rows {
        set.labels.push(label);
        set.states.push(state);
        set.wigner_vertices.push(w);
    }
    Ok(set)
}

/// Fresh enumeration of all pure stabilizer states on `n_qubits ∈ {1, 2}`.
pub fn enumerate_stabilizer_states(n_qubits: usize) -> Result<StabilizerSet> {
    brute_force(n_qubits)
}

/// Shared, lazily enumerated stabilizer set.
pub fn stabilizer_set(n_qubits: usize) -> Result<&'static StabilizerSet> {
    static ONE: OnceLock<StabilizerSet> = OnceLock::new();
    static TWO: OnceLock<StabilizerSet> = OnceLock::new();
    let cell = match n_qubits {
        1 => &ONE,
        2 => &TWO,
        n => return Err(MssError::UnsupportedQubits(n)),
    };
    if let Some(set) = cell.get() {
        return Ok(set);
    }
    let set = brute_force(n_qubits)?;
    Ok(cell.get_or_init(|| set))
}

pub fn is_stabilizer(psi: &PureState) -> Result<bool> {
    let set = stabilizer_set(psi.n_qubits())?;
    for s in set.states() {
        if s.overlap(psi)? > 1.0 - 1e-10 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The 24 single-qubit Clifford unitaries, up to global phase, generated by H and S.
pub fn single_qubit_cliffords() -> Vec<Unitary1Q> {
    let canonical = |u: &Unitary1Q| -> [C64; 4] {
        let mut e: Vec<C64> = u.matrix().iter().flatten().copied().collect();
        canonical_phase(&mut e);
        [e[0], e[1], e[2], e[3]]
    };
    let same = |a: &[C64; 4], b: &[C64; 4]| a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-9);
    let generators = [Unitary1Q::hadamard(), Unitary1Q::s()];
    let mut group = vec![Unitary1Q::identity()];
    let mut keys = vec![canonical(&group[0])];
    let mut frontier = group.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for u in &frontier {
            for g in &generators {
                let v = g.mul(u);
                let key = canonical(&v);
                if !keys.iter().any(|k| same(k, &key)) {
                    keys.push(key);
                    group.push(v);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    group
}
