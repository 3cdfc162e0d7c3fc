//! Discrete Wigner functions from the Wootters product construction.
//!
//! A phase-space point of an `n`-qubit system is one `(q, p)` pair per qubit.
//! Flat index is `Σᵢ 4^{n-1-i} (2qᵢ + pᵢ)`, so qubit 0 varies slowest, matching
//! the big-endian register convention of [`crate::qcore`].

use serde::Serialize;

use crate::error::{MssError, Result};
use crate::qcore::{DensityMatrix, Operator, C64};

/// Largest register for which Wigner vectors are supported.
pub const MAX_WIGNER_QUBITS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhasePoint {
    coords: Vec<(u8, u8)>,
}

impl PhasePoint {
    pub fn new(coords: Vec<(u8, u8)>) -> Result<Self> {
        if coords.is_empty() || coords.iter().any(|&(q, p)| q > 1 || p > 1) {
            return Err(MssError::InvalidArgument(format!("invalid phase-space point {coords:?}")));
        }
        Ok(Self { coords })
    }

    pub fn from_index(n_qubits: usize, index: usize) -> Self {
        let coords = (0..n_qubits)
            .map(|i| {
                let local = (index >> (2 * (n_qubits - 1 - i))) & 3;
                ((local >> 1) as u8, (local & 1) as u8)
            })
            .collect();
        Self { coords }
    }

    pub fn index(&self) -> usize {
        self.coords.iter().fold(0, |acc, &(q, p)| 4 * acc + (2 * q + p) as usize)
    }

    pub fn coords(&self) -> &[(u8, u8)] {
        &self.coords
    }

    pub fn n_qubits(&self) -> usize {
        self.coords.len()
    }
}

/// A(q,p) = ½(I + (−1)^p X + (−1)^{q+p} Y + (−1)^q Z) for one qubit.
fn single_phase_point(q: u8, p: u8) -> Operator {
    let sx = if p == 0 { 1.0 } else { -1.0 };
    let sy = if (q + p).is_multiple_of(2) { 1.0 } else { -1.0 };
    let sz = if q == 0 { 1.0 } else { -1.0 };
    let data = vec![
        C64::new((1.0 + sz) / 2.0, 0.0),
        C64::new(sx / 2.0, -sy / 2.0),
        C64::new(sx / 2.0, sy / 2.0),
        C64::new((1.0 - sz) / 2.0, 0.0),
    ];
    Operator::from_rows(1, data).expect("2x2 operator")
}

/// Tensor product of the single-qubit phase-point operators at `point`.
pub fn phase_point_operator(point: &PhasePoint) -> Operator {
    let mut coords = point.coords().iter();
    let &(q, p) = coords.next().expect("phase point has at least one qubit");
    coords.fold(single_phase_point(q, p), |acc, &(q, p)| acc.kron(&single_phase_point(q, p)))
}

fn check_supported(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_WIGNER_QUBITS {
        return Err(MssError::UnsupportedQubits(n_qubits));
    }
    Ok(())
}

/// Wigner quasi-probability vector of an `n`-qubit state, `4^n` entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerVector {
    n_qubits: usize,
    values: Vec<f64>,
}

impl WignerVector {
    /// Accepts only vectors summing to 1 within 1e-9.
    pub fn new(n_qubits: usize, values: Vec<f64>) -> Result<Self> {
        check_supported(n_qubits)?;
        if values.len() != 1 << (2 * n_qubits) {
            return Err(MssError::DimensionMismatch { expected: 1 << (2 * n_qubits), actual: values.len() });
        }
        let total: f64 = values.iter().sum();
        if !total.is_finite() || (total - 1.0).abs() > 1e-9 {
            return Err(MssError::NonNormalised(total));
        }
        Ok(Self { n_qubits, values })
    }

    pub(crate) fn from_raw(n_qubits: usize, values: Vec<f64>) -> Self {
        Self { n_qubits, values }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, point: &PhasePoint) -> f64 {
        self.values[point.index()]
    }

    pub fn l1_distance(&self, other: &WignerVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Phase-point operators for an `n`-qubit register in flat-index order.
pub fn phase_point_basis(n_qubits: usize) -> Result<Vec<Operator>> {
    check_supported(n_qubits)?;
    Ok((0..1 << (2 * n_qubits))
        .map(|i| phase_point_operator(&PhasePoint::from_index(n_qubits, i)))
        .collect())
}

/// W(α) = tr(ρ A_α) / 2^n.
pub fn wigner_of(rho: &DensityMatrix) -> Result<WignerVector> {
    let n = rho.n_qubits();
    let scale = 1.0 / (1usize << n) as f64;
    let values = phase_point_basis(n)?
        .iter()
        .map(|a| rho.expectation(a).map(|v| v * scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(WignerVector { n_qubits: n, values })
}

/// ρ = Σ_α W(α) A_α.
pub fn state_from_wigner(w: &WignerVector) -> Result<DensityMatrix> {
    let total = w.sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(MssError::NonNormalised(total));
    }
    let basis = phase_point_basis(w.n_qubits)?;
    let mut acc = basis[0].scale(w.values[0]);
    for (a, &v) in basis.iter().zip(&w.values).skip(1) {
        acc = acc.add(&a.scale(v))?;
    }
    DensityMatrix::new(acc)
}

/// Operator H = Σ_α y_α A_α / 2^n, so that tr(H ρ) = y · W_ρ.
pub fn operator_from_dual(n_qubits: usize, coefficients: &[f64]) -> Result<Operator> {
    let basis = phase_point_basis(n_qubits)?;
    if coefficients.len() != basis.len() {
        return Err(MssError::DimensionMismatch { expected: basis.len(), actual: coefficients.len() });
    }
    let scale = 1.0 / (1usize << n_qubits) as f64;
    let mut acc = basis[0].scale(coefficients[0] * scale);
    for (a, &y) in basis.iter().zip(coefficients).skip(1) {
        acc = acc.add(&a.scale(y * scale))?;
    }
    Ok(acc)
}
