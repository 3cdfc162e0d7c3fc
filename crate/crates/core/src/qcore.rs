//! Dense few-qubit state mechanics.
//!
//! Qubit `k` of an `n`-qubit register is bit `n - 1 - k` of the computational
//! basis index, so `q0` is the most significant bit and `|0⟩_A|1⟩_B|1⟩_C` is
//! index `0b011`. Every register is small (at most six qubits), so all
//! operators are stored as dense row-major complex matrices.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MssError, Result};

pub type C64 = Complex64;

/// Construction tolerance for norms, traces and Hermiticity.
pub const STATE_TOL: f64 = 1e-12;
/// Allowed negative eigenvalue after reconstruction.
pub const PSD_TOL: f64 = 1e-10;
/// Branches below this probability are treated as impossible.
pub const BRANCH_TOL: f64 = 1e-14;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Single-qubit Pauli measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    /// Eigenvector for `outcome` (0 is the +1 eigenvalue).
    pub fn eigenvector(self, outcome: u8) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        match self {
            Basis::X => [C64::new(h, 0.0), C64::new(sign * h, 0.0)],
            Basis::Y => [C64::new(h, 0.0), C64::new(0.0, sign * h)],
            Basis::Z if outcome == 0 => [ONE, ZERO],
            Basis::Z => [ZERO, ONE],
        }
    }

    /// Unitary that maps this basis onto the computational one before a Z readout.
    pub fn rotation(self) -> Vec<Unitary1Q> {
        match self {
            Basis::X => vec![Unitary1Q::hadamard()],
            Basis::Y => vec![Unitary1Q::s_dagger(), Unitary1Q::hadamard()],
            Basis::Z => vec![],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[inline]
fn bit_of(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

fn check_index(index: usize, n_qubits: usize) -> Result<()> {
    if index >= n_qubits {
        Err(MssError::IndexOutOfRange { index, n_qubits })
    } else {
        Ok(())
    }
}

/// Insert `bit` at register position `qubit` of an index over the other `n - 1` qubits.
#[inline]
fn insert_bit(reduced: usize, n_qubits: usize, qubit: usize, bit: usize) -> usize {
    let low_width = n_qubits - 1 - qubit;
    let low = reduced & ((1 << low_width) - 1);
    let high = reduced >> low_width;
    (high << (low_width + 1)) | (bit << low_width) | low
}

// ---------------------------------------------------------------------------
// Single-qubit unitaries
// ---------------------------------------------------------------------------

/// 2×2 unitary, entries `[[G00, G01], [G10, G11]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary1Q {
    m: [[C64; 2]; 2],
}

impl Unitary1Q {
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self> {
        Self::with_tolerance(m, STATE_TOL)
    }

    /// Accepts matrices that are unitary to within `tol` (entrywise on U†U − I).
    pub fn with_tolerance(m: [[C64; 2]; 2], tol: f64) -> Result<Self> {
        if m.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MssError::InvalidArgument("non-finite gate entry".into()));
        }
        let dev = unitarity_defect(&m);
        if dev > tol {
            return Err(MssError::NonUnitary(dev));
        }
        Ok(Self { m })
    }

    pub(crate) const fn from_raw(m: [[C64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.m
    }

    pub fn identity() -> Self {
        Self::from_raw([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn hadamard() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_raw([[h, h], [h, -h]])
    }

    pub fn pauli_x() -> Self {
        Self::from_raw([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Self::from_raw([[ZERO, -I], [I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::from_raw([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn s() -> Self {
        Self::phase(std::f64::consts::FRAC_PI_2)
    }

    pub fn s_dagger() -> Self {
        Self::phase(-std::f64::consts::FRAC_PI_2)
    }

    /// P(φ) = diag(1, e^{iφ}).
    pub fn phase(phi: f64) -> Self {
        Self::from_raw([[ONE, ZERO], [ZERO, C64::from_polar(1.0, phi)]])
    }

    /// e^{iθX} = cos θ I + i sin θ X.
    pub fn exp_ix(theta: f64) -> Self {
        let c = C64::new(theta.cos(), 0.0);
        let s = C64::new(0.0, theta.sin());
        Self::from_raw([[c, s], [s, c]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::from_raw([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self::from_raw(out)
    }

    fn conj_entries(&self) -> Self {
        let m = &self.m;
        Self::from_raw([[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]])
    }
}

pub(crate) fn unitarity_defect(m: &[[C64; 2]; 2]) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let v = m[0][r].conj() * m[0][c] + m[1][r].conj() * m[1][c];
            let target = if r == c { ONE } else { ZERO };
            dev = dev.max((v - target).norm());
        }
    }
    dev
}

// ---------------------------------------------------------------------------
// Bloch vectors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let b = Self { x, y, z };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) || b.norm() > 1.0 + 1e-9 {
            return Err(MssError::InvalidState(format!("Bloch vector ({x}, {y}, {z}) outside the unit ball")));
        }
        Ok(b)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.x.abs() + self.y.abs() + self.z.abs()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

// ---------------------------------------------------------------------------
// Pure states
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(MssError::UnsupportedQubits(0));
        }
        if amps.len() != 1 << n_qubits {
            return Err(MssError::DimensionMismatch { expected: 1 << n_qubits, actual: amps.len() });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(MssError::InvalidState("non-finite amplitude".into()));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(MssError::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Normalises `amps` before validating.
    pub fn normalized(n_qubits: usize, mut amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < BRANCH_TOL || !norm.is_finite() {
            return Err(MssError::InvalidState("zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(n_qubits, amps)
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if index >= 1 << n_qubits {
            return Err(MssError::IndexOutOfRange { index, n_qubits });
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Self::new(n_qubits, amps)
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn plus() -> Self {
        Self::from_single(Basis::X.eigenvector(0))
    }

    /// Single-qubit state with amplitudes `[a0, a1]`; assumes they are normalised.
    pub(crate) fn from_single(amps: [C64; 2]) -> Self {
        Self { n_qubits: 1, amps: amps.to_vec() }
    }

    /// P(φ)|+⟩ = (|0⟩ + e^{iφ}|1⟩)/√2.
    pub fn phase_plus(phi: f64) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_single([C64::new(h, 0.0), C64::from_polar(h, phi)])
    }

    /// (|0…0⟩ + e^{iφ}|1…1⟩)/√2.
    pub fn ghz_with_phase(n_qubits: usize, phi: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(MssError::UnsupportedQubits(0));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = C64::new(h, 0.0);
        amps[(1 << n_qubits) - 1] = C64::from_polar(h, phi);
        Self::new(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product with `self` on the most significant qubits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        PureState { n_qubits: self.n_qubits + other.n_qubits, amps }
    }

    pub fn apply_1q(&self, gate: &Unitary1Q, target: usize) -> Result<PureState> {
        check_index(target, self.n_qubits)?;
        let mut out = self.clone();
        apply_1q_vec(&mut out.amps, self.n_qubits, target, gate);
        Ok(out)
    }

    pub fn apply_cx(&self, control: usize, target: usize) -> Result<PureState> {
        check_index(control, self.n_qubits)?;
        check_index(target, self.n_qubits)?;
        if control == target {
            return Err(MssError::EqualIndices(control));
        }
        let (cb, tb) = (bit_of(self.n_qubits, control), bit_of(self.n_qubits, target));
        let mut out = self.clone();
        for i in 0..out.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                out.amps.swap(i, i | tb);
            }
        }
        Ok(out)
    }

    /// Projects `target` onto the `basis` eigenvector for `outcome` and removes it
    /// from the register. Returns the branch probability and the renormalised rest.
    pub fn project_measure(&self, target: usize, basis: Basis, outcome: u8) -> Result<(f64, PureState)> {
        check_index(target, self.n_qubits)?;
        if self.n_qubits < 2 {
            return Err(MssError::InvalidArgument("cannot remove the only qubit of a register".into()));
        }
        if outcome > 1 {
            return Err(MssError::InvalidArgument(format!("outcome {outcome} is not a bit")));
        }
        let v = basis.eigenvector(outcome);
        let n = self.n_qubits;
        let mut rest: Vec<C64> = (0..1 << (n - 1))
            .map(|r| {
                v[0].conj() * self.amps[insert_bit(r, n, target, 0)]
                    + v[1].conj() * self.amps[insert_bit(r, n, target, 1)]
            })
            .collect();
        let prob: f64 = rest.iter().map(|a| a.norm_sqr()).sum();
        if prob < BRANCH_TOL {
            return Err(MssError::ImpossibleBranch(prob));
        }
        let scale = prob.sqrt();
        rest.iter_mut().for_each(|a| *a /= scale);
        Ok((prob, PureState { n_qubits: n - 1, amps: rest }))
    }

    /// |⟨self|other⟩|².
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(MssError::DimensionMismatch { expected: self.n_qubits, actual: other.n_qubits });
        }
        let ip: C64 = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum();
        Ok(ip.norm_sqr())
    }

    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.amps.len();
        let mut data = vec![ZERO; dim * dim];
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in self.amps.iter().enumerate() {
                data[i * dim + j] = a * b.conj();
            }
        }
        DensityMatrix { op: Operator { n_qubits: self.n_qubits, data } }
    }
}

fn apply_1q_vec(amps: &mut [C64], n_qubits: usize, target: usize, gate: &Unitary1Q) {
    let tb = bit_of(n_qubits, target);
    let g = &gate.m;
    for i in 0..amps.len() {
        if i & tb == 0 {
            let (a0, a1) = (amps[i], amps[i | tb]);
            amps[i] = g[0][0] * a0 + g[0][1] * a1;
            amps[i | tb] = g[1][0] * a0 + g[1][1] * a1;
        }
    }
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// Dense `2^n × 2^n` complex operator, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    n_qubits: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn from_rows(n_qubits: usize, data: Vec<C64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(MssError::DimensionMismatch { expected: dim * dim, actual: data.len() });
        }
        Ok(Self { n_qubits, data })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut data = vec![ZERO; dim * dim];
        (0..dim).for_each(|i| data[i * dim + i] = ONE);
        Self { n_qubits, data }
    }

    pub fn from_unitary(u: &Unitary1Q) -> Self {
        Self { n_qubits: 1, data: u.m.iter().flatten().copied().collect() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator { n_qubits: self.n_qubits, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Operator { n_qubits: self.n_qubits, data })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.add(&other.scale(-1.0))
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.same_shape(other)?;
        let dim = self.dim();
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                let a = self.data[i * dim + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..dim {
                    data[i * dim + j] += a * other.data[k * dim + j];
                }
            }
        }
        Ok(Operator { n_qubits: self.n_qubits, data })
    }

    pub fn adjoint(&self) -> Operator {
        let dim = self.dim();
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[j * dim + i] = self.data[i * dim + j].conj();
            }
        }
        Operator { n_qubits: self.n_qubits, data }
    }

    /// tr(self · other).
    pub fn trace_product(&self, other: &Operator) -> Result<C64> {
        self.same_shape(other)?;
        let dim = self.dim();
        let mut acc = ZERO;
        for i in 0..dim {
            for k in 0..dim {
                acc += self.data[i * dim + k] * other.data[k * dim + i];
            }
        }
        Ok(acc)
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..da {
            for j in 0..da {
                let a = self.data[i * da + j];
                for k in 0..db {
                    for l in 0..db {
                        data[(i * db + k) * dim + j * db + l] = a * other.data[k * db + l];
                    }
                }
            }
        }
        Operator { n_qubits: self.n_qubits + other.n_qubits, data }
    }

    /// U (·) U† with a single-qubit U acting on `target`.
    pub fn conjugate_1q(&self, gate: &Unitary1Q, target: usize) -> Result<Operator> {
        check_index(target, self.n_qubits)?;
        let dim = self.dim();
        let mut data = self.data.clone();
        let mut col = vec![ZERO; dim];
        for j in 0..dim {
            (0..dim).for_each(|i| col[i] = data[i * dim + j]);
            apply_1q_vec(&mut col, self.n_qubits, target, gate);
            (0..dim).for_each(|i| data[i * dim + j] = col[i]);
        }
        let conj = gate.conj_entries();
        for row in data.chunks_mut(dim) {
            apply_1q_vec(row, self.n_qubits, target, &conj);
        }
        Ok(Operator { n_qubits: self.n_qubits, data })
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let dim = self.dim();
        let m = DMatrix::from_fn(dim, dim, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    fn same_shape(&self, other: &Operator) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(MssError::DimensionMismatch { expected: self.n_qubits, actual: other.n_qubits });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(op: Operator) -> Result<Self> {
        if op.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MssError::InvalidState("non-finite entry".into()));
        }
        let herm = op.hermiticity_defect();
        if herm > STATE_TOL {
            return Err(MssError::InvalidState(format!("not Hermitian (defect {herm:.3e})")));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(MssError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_ev = op.hermitian_eigenvalues()[0];
        if min_ev < -PSD_TOL {
            return Err(MssError::InvalidState(format!("negative eigenvalue {min_ev:.3e}")));
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = (1usize << n_qubits) as f64;
        Self { op: Operator::identity(n_qubits).scale(1.0 / dim) }
    }

    /// ρ = (I + xX + yY + zZ)/2.
    pub fn from_bloch(b: &BlochVector) -> Self {
        let data = vec![
            C64::new((1.0 + b.z) / 2.0, 0.0),
            C64::new(b.x / 2.0, -b.y / 2.0),
            C64::new(b.x / 2.0, b.y / 2.0),
            C64::new((1.0 - b.z) / 2.0, 0.0),
        ];
        Self { op: Operator { n_qubits: 1, data } }
    }

    /// Convex combination `Σ wᵢ ρᵢ`; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| MssError::InvalidArgument("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(MssError::InvalidArgument("mixture weights must be a probability vector".into()));
        }
        let mut acc = first.1.op.scale(first.0);
        for (w, rho) in &parts[1..] {
            acc = acc.add(&rho.op.scale(*w))?;
        }
        Ok(Self { op: acc })
    }

    pub fn n_qubits(&self) -> usize {
        self.op.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.op.get(row, col)
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { op: self.op.kron(&other.op) }
    }

    /// Reduced state on `keep`, qubits ordered by ascending original index.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits();
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(MssError::InvalidArgument("partial trace must keep at least one qubit".into()));
        }
        for &k in &keep {
            check_index(k, n)?;
        }
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let kd = 1usize << keep.len();
        let td = 1usize << traced.len();
        let full_index = |kept: usize, rest: usize| -> usize {
            let mut idx = 0;
            for (pos, &q) in keep.iter().enumerate() {
                if kept & (1 << (keep.len() - 1 - pos)) != 0 {
                    idx |= bit_of(n, q);
                }
            }
            for (pos, &q) in traced.iter().enumerate() {
                if rest & (1 << (traced.len() - 1 - pos)) != 0 {
                    idx |= bit_of(n, q);
                }
            }
            idx
        };
        let mut data = vec![ZERO; kd * kd];
        for a in 0..kd {
            for b in 0..kd {
                data[a * kd + b] = (0..td).map(|e| self.get(full_index(a, e), full_index(b, e))).sum();
            }
        }
        Ok(DensityMatrix { op: Operator { n_qubits: keep.len(), data } })
    }

    pub fn bloch(&self) -> Result<BlochVector> {
        if self.n_qubits() != 1 {
            return Err(MssError::DimensionMismatch { expected: 1, actual: self.n_qubits() });
        }
        let r01 = self.get(0, 1);
        Ok(BlochVector {
            x: 2.0 * r01.re,
            y: -2.0 * r01.im,
            z: self.get(0, 0).re - self.get(1, 1).re,
        })
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn fidelity(&self, psi: &PureState) -> Result<f64> {
        if psi.n_qubits() != self.n_qubits() {
            return Err(MssError::DimensionMismatch { expected: self.n_qubits(), actual: psi.n_qubits() });
        }
        let a = psi.amplitudes();
        let dim = self.dim();
        let mut acc = ZERO;
        for i in 0..dim {
            for j in 0..dim {
                acc += a[i].conj() * self.get(i, j) * a[j];
            }
        }
        Ok(acc.re.clamp(0.0, 1.0))
    }

    /// ½‖a − b‖₁ from the eigenvalues of a − b.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        let diff = self.op.sub(&other.op)?;
        let d: f64 = diff.hermitian_eigenvalues().iter().map(|e| e.abs()).sum::<f64>() / 2.0;
        Ok(d.clamp(0.0, 1.0))
    }

    /// tr(H ρ) for a Hermitian `h`.
    pub fn expectation(&self, h: &Operator) -> Result<f64> {
        Ok(h.trace_product(&self.op)?.re)
    }

    pub fn apply_1q(&self, gate: &Unitary1Q, target: usize) -> Result<DensityMatrix> {
        Ok(DensityMatrix { op: self.op.conjugate_1q(gate, target)? })
    }

    pub fn apply_cx(&self, control: usize, target: usize) -> Result<DensityMatrix> {
        let n = self.n_qubits();
        check_index(control, n)?;
        check_index(target, n)?;
        if control == target {
            return Err(MssError::EqualIndices(control));
        }
        let (cb, tb) = (bit_of(n, control), bit_of(n, target));
        let perm = |i: usize| if i & cb != 0 { i ^ tb } else { i };
        let dim = self.dim();
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = self.get(perm(i), perm(j));
            }
        }
        Ok(DensityMatrix { op: Operator { n_qubits: n, data } })
    }

    /// With probability `p` the qubit is replaced by I/2 (Pauli-twirl form).
    pub fn depolarize_1q(&self, target: usize, p: f64) -> Result<DensityMatrix> {
        check_probability(p)?;
        if p == 0.0 {
            return Ok(self.clone());
        }
        let mut acc = self.op.scale(1.0 - p + p / 4.0);
        for pauli in [Unitary1Q::pauli_x(), Unitary1Q::pauli_y(), Unitary1Q::pauli_z()] {
            acc = acc.add(&self.op.conjugate_1q(&pauli, target)?.scale(p / 4.0))?;
        }
        Ok(DensityMatrix { op: acc })
    }

    /// With probability `p` the pair is replaced by I/4.
    pub fn depolarize_2q(&self, a: usize, b: usize, p: f64) -> Result<DensityMatrix> {
        check_probability(p)?;
        if a == b {
            return Err(MssError::EqualIndices(a));
        }
        if p == 0.0 {
            return Ok(self.clone());
        }
        let paulis = [
            Unitary1Q::identity(),
            Unitary1Q::pauli_x(),
            Unitary1Q::pauli_y(),
            Unitary1Q::pauli_z(),
        ];
        let mut acc = self.op.scale(1.0 - p);
        for pa in &paulis {
            let left = self.op.conjugate_1q(pa, a)?;
            for pb in &paulis {
                acc = acc.add(&left.conjugate_1q(pb, b)?.scale(p / 16.0))?;
            }
        }
        Ok(DensityMatrix { op: acc })
    }

    /// Computational-basis outcome distribution.
    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re.max(0.0)).collect()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(MssError::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Serialize)]
struct MatrixRepr {
    n_qubits: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for Operator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dim = self.dim();
        let rows = |f: fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..dim).map(|i| (0..dim).map(|j| f(self.get(i, j))).collect()).collect()
        };
        MatrixRepr { n_qubits: self.n_qubits(), re: rows(|z| z.re), im: rows(|z| z.im) }
            .serialize(serializer)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.op.serialize(serializer)
    }
}
