#![allow(dead_code)]

use mss_core::qcore::{BlochVector, DensityMatrix, PureState, Unitary1Q, C64};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

/// e^{iα} Rz(β) Ry(γ) Rz(δ).
pub fn euler_unitary(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Unitary1Q {
    let (c, s) = ((gamma / 2.0).cos(), (gamma / 2.0).sin());
    let g = C64::from_polar(1.0, alpha);
    let e = |t: f64| C64::from_polar(1.0, t);
    let m = [
        [g * e(-(beta + delta) / 2.0) * c, -g * e(-(beta - delta) / 2.0) * s],
        [g * e((beta - delta) / 2.0) * s, g * e((beta + delta) / 2.0) * c],
    ];
    Unitary1Q::new(m).expect("Euler form is unitary")
}

pub fn unitary() -> impl Strategy<Value = Unitary1Q> {
    (0.0..TAU, 0.0..TAU, 0.0..PI, 0.0..TAU).prop_map(|(a, b, g, d)| euler_unitary(a, b, g, d))
}

pub fn pure_state(n_qubits: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n_qubits)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(move |v| PureState::normalized(n_qubits, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

/// Mixed state from a random pure state of twice the size, traced down.
pub fn mixed_state(n_qubits: usize) -> impl Strategy<Value = DensityMatrix> {
    pure_state(2 * n_qubits).prop_map(move |psi| psi.to_density().partial_trace(&(0..n_qubits).collect::<Vec<_>>()).unwrap())
}

pub fn bloch_in_ball() -> impl Strategy<Value = BlochVector> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y, z, r)| {
        let n = (x * x + y * y + z * z).sqrt().max(1e-9);
        let r = r.cbrt();
        BlochVector { x: r * x / n, y: r * y / n, z: r * z / n }
    })
}

/// G = |+⟩⟨e| + e^{−iχ}|−⟩⟨e⊥| with `e` on the XY equator, so G†|+⟩ = |e⟩.
pub fn secure_gate(theta: f64, chi: f64) -> Unitary1Q {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = [C64::new(h, 0.0), C64::from_polar(h, theta)];
    let e_perp = [C64::new(h, 0.0), -C64::from_polar(h, theta)];
    let plus = [C64::new(h, 0.0), C64::new(h, 0.0)];
    let minus = [C64::new(h, 0.0), C64::new(-h, 0.0)];
    let phase = C64::from_polar(1.0, -chi);
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = plus[r] * e[c].conj() + phase * minus[r] * e_perp[c].conj();
        }
    }
    Unitary1Q::new(m).expect("outer-product construction is unitary")
}
