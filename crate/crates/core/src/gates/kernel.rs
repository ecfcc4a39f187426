//! In-place state-vector kernels. Qubit `q` of an `n`-qubit register is bit
//! `n - 1 - q` of the amplitude index.

use crate::qstate::C64;

#[inline]
pub(crate) fn bit(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

/// Row-major 2×2 matrix on qubit `q`.
pub(crate) fn apply_1q(amps: &mut [C64], n_qubits: usize, q: usize, m: &[C64; 4]) {
    let mask = bit(n_qubits, q);
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[j] = m[2] * a0 + m[3] * a1;
        }
    }
}

/// Row-major 4×4 matrix in the basis `|q0 q1⟩`, `q0` most significant.
pub(crate) fn apply_2q(amps: &mut [C64], n_qubits: usize, q0: usize, q1: usize, m: &[C64; 16]) {
    let m0 = bit(n_qubits, q0);
    let m1 = bit(n_qubits, q1);
    for i in 0..amps.len() {
        if i & (m0 | m1) == 0 {
            let idx = [i, i | m1, i | m0, i | m0 | m1];
            let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
            for (r, &k) in idx.iter().enumerate() {
                amps[k] = m[4 * r] * v[0] + m[4 * r + 1] * v[1] + m[4 * r + 2] * v[2] + m[4 * r + 3] * v[3];
            }
        }
    }
}

/// 2×2 matrix on `target`, applied where `index & control_mask == control_value`.
pub(crate) fn apply_controlled(
    amps: &mut [C64],
    n_qubits: usize,
    control_mask: usize,
    control_value: usize,
    target: usize,
    m: &[C64; 4],
) {
    let t = bit(n_qubits, target);
    for i in 0..amps.len() {
        if i & t == 0 && i & control_mask == control_value {
            let j = i | t;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[j] = m[2] * a0 + m[3] * a1;
        }
    }
}
