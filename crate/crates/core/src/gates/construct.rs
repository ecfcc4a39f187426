//! Explicit preparation circuits: Bell-pair arrays, the spectrum-preparation
//! circuit, and the spectrum-then-local-bases composition.

use super::circuit::{Circuit, ControlledUnitary};
use super::GateSet;
use crate::error::{Error, Result};
use crate::qstate::{BipartitePartition, Side, C64};

/// `n_pairs` Bell pairs on `2·n_pairs` qubits: `H i; CNOT i (n_pairs+i)` for
/// each `i`, pairing qubit `i` of `A` with qubit `i` of `B`.
pub fn bell_pair_circuit(n_pairs: usize, gs: &GateSet) -> Result<Circuit> {
    if n_pairs == 0 {
        return Err(Error::InvalidParameter("n_pairs must be positive".into()));
    }
    gs.require("H")?;
    gs.require("CNOT")?;
    let mut c = Circuit::new(2 * n_pairs);
    for i in 0..n_pairs {
        c.push_gate("H", &[i])?.push_gate("CNOT", &[i, n_pairs + i])?;
    }
    Ok(c)
}

/// Prepares `Σ_i c_i |i⟩_A|i⟩_B`, whose `A` reduction is
/// `diag(|c_0|², |c_1|², …)` in the computational basis.
///
/// The amplitudes are first loaded onto `A` by a binary tree of controlled
/// rotations (one per internal node with nonzero weight, leaves carrying the
/// phases), then `min(n_a, n_b)` CNOTs copy the low qubits of `A` onto `B`.
/// The total is at most `2^{n_a} − 1 + n_a` operations.
pub fn spectrum_circuit(coeffs: &[C64], part: BipartitePartition, gs: &GateSet) -> Result<Circuit> {
    gs.require("CNOT")?;
    if coeffs.len() > part.dim_a() {
        return Err(Error::TooManyCoefficients {
            count: coeffs.len(),
            capacity: part.dim_a(),
        });
    }
    let norm2: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm2));
    }
    let copied = part.n_a.min(part.n_b);
    if let Some(i) = coeffs.iter().rposition(|c| c.norm() > 0.0) {
        if i >= 1 << copied {
            return Err(Error::TooManyCoefficients {
                count: i + 1,
                capacity: 1 << copied,
            });
        }
    }

    let n = part.n_qubits();
    let mut amps = vec![C64::new(0.0, 0.0); part.dim_a()];
    amps[..coeffs.len()].copy_from_slice(coeffs);
    let mut circuit = Circuit::new(n);
    load_amplitudes(&mut circuit, &amps, part.n_a)?;

    let offset = part.n_a - copied;
    for j in 0..copied {
        circuit.push_gate("CNOT", &[offset + j, part.n_a + j])?;
    }
    Ok(circuit)
}

/// Appends ops mapping `|0…0⟩` on qubits `0..n` to `Σ_i amps[i] |i⟩`.
fn load_amplitudes(circuit: &mut Circuit, amps: &[C64], n: usize) -> Result<()> {
    // weight[level][prefix] = ‖amps restricted to indices starting with prefix‖
    let mut weights: Vec<Vec<f64>> = vec![amps.iter().map(|a| a.norm()).collect()];
    for _ in 0..n {
        let prev = weights.last().unwrap();
        let next = prev.chunks(2).map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt()).collect();
        weights.push(next);
    }
    weights.reverse(); // weights[k] has 2^k entries

    for level in 0..n {
        for prefix in 0..1usize << level {
            let parent = weights[level][prefix];
            if parent < 1e-15 {
                continue;
            }
            let matrix = if level + 1 == n {
                let (a0, a1) = (amps[2 * prefix] / parent, amps[2 * prefix + 1] / parent);
                // columns: U|0⟩ = (a0, a1), U|1⟩ orthogonal
                [a0, -a1.conj(), a1, a0.conj()]
            } else {
                let (w0, w1) = (
                    weights[level + 1][2 * prefix] / parent,
                    weights[level + 1][2 * prefix + 1] / parent,
                );
                [
                    C64::new(w0, 0.0),
                    C64::new(-w1, 0.0),
                    C64::new(w1, 0.0),
                    C64::new(w0, 0.0),
                ]
            };
            if (matrix[0] - 1.0).norm() < 1e-15 {
                continue;
            }
            let controls = (0..level).map(|q| (q, (prefix >> (level - 1 - q)) & 1 == 1)).collect();
            circuit.push_controlled(ControlledUnitary {
                controls,
                target: level,
                matrix,
            })?;
        }
    }
    Ok(())
}

/// `U_S` followed by `U_A ⊗ U_B`. `u_a` and `u_b` are full-register circuits
/// that must only touch their own side of `part`.
pub fn generic_state_circuit(
    spectrum_part: &Circuit,
    u_a: &Circuit,
    u_b: &Circuit,
    part: BipartitePartition,
) -> Result<Circuit> {
    let n = part.n_qubits();
    for (c, side) in [(spectrum_part, None), (u_a, Some(Side::A)), (u_b, Some(Side::B))] {
        if c.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: c.n_qubits(),
            });
        }
        if let Some(side) = side {
            let allowed = part.side_qubits(side);
            if let Some(q) = c.support().into_iter().find(|q| !allowed.contains(q)) {
                return Err(Error::SupportViolation(format!(
                    "U_{side:?} touches qubit {q}, outside {allowed:?}"
                )));
            }
        }
    }
    spectrum_part.then(u_a)?.then(u_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::apply_circuit;
    use crate::qstate::{
        eigendecompose, partial_trace, schmidt_decompose, trace_distance, von_neumann_entropy, DensityMatrix, PureState,
    };
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn bell_pairs() {
        let gs = GateSet::standard();
        for n in 1..=3 {
            let c = bell_pair_circuit(n, &gs).unwrap();
            assert_eq!(c.gate_count(), 2 * n);
            let psi = apply_circuit(&c, &gs, &PureState::zero(2 * n)).unwrap();
            let part = BipartitePartition::new(n, n).unwrap();
            let rho = partial_trace(&psi, part, Side::A).unwrap();
            assert!(trace_distance(&rho, &DensityMatrix::maximally_mixed(n)).unwrap() < 1e-12);
            assert_abs_diff_eq!(von_neumann_entropy(&rho), n as f64, epsilon = 1e-12);
        }
        assert!(matches!(
            bell_pair_circuit(1, &GateSet::from_labels("x", &["X", "CNOT"]).unwrap()),
            Err(Error::MissingGate { .. })
        ));
    }

    #[test]
    fn product_spectrum() {
        let gs = GateSet::standard();
        let part = BipartitePartition::new(1, 1).unwrap();
        let c = spectrum_circuit(&real(&[1.0, 0.0]), part, &gs).unwrap();
        assert!(c.gate_count() <= 3);
        let psi = apply_circuit(&c, &gs, &PureState::zero(2)).unwrap();
        let rho = partial_trace(&psi, part, Side::A).unwrap();
        assert!(trace_distance(&rho, &PureState::zero(1).density()).unwrap() < 1e-12);
    }

    #[test]
    fn balanced_spectrum_is_a_bell_state() {
        let gs = GateSet::standard();
        let part = BipartitePartition::new(1, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = spectrum_circuit(&real(&[s, s]), part, &gs).unwrap();
        let psi = apply_circuit(&c, &gs, &PureState::zero(2)).unwrap();
        let (spec, _) = eigendecompose(&partial_trace(&psi, part, Side::A).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues()[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn unequal_spectrum_round_trips_through_schmidt() {
        let gs = GateSet::standard();
        let part = BipartitePartition::new(1, 1).unwrap();
        let c = spectrum_circuit(&real(&[0.7f64.sqrt(), 0.3f64.sqrt()]), part, &gs).unwrap();
        let psi = apply_circuit(&c, &gs, &PureState::zero(2)).unwrap();
        let sd = schmidt_decompose(&psi, part).unwrap();
        assert_abs_diff_eq!(sd.coefficients[0], 0.7f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(sd.coefficients[1], 0.3f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn complex_coefficients_land_exactly() {
        let gs = GateSet::standard();
        let part = BipartitePartition::new(2, 2).unwrap();
        let coeffs = vec![
            C64::from_polar(0.5, 0.3),
            C64::from_polar(0.1f64.sqrt(), -2.0),
            C64::from_polar(0.4f64.sqrt(), 1.0),
            C64::from_polar(0.25f64.sqrt(), 0.0),
        ];
        let c = spectrum_circuit(&coeffs, part, &gs).unwrap();
        let psi = apply_circuit(&c, &gs, &PureState::zero(4)).unwrap();
        for (i, ci) in coeffs.iter().enumerate() {
            assert!((psi.amplitudes()[i * 4 + i] - ci).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        let gs = GateSet::standard();
        let part = BipartitePartition::new(1, 1).unwrap();
        assert!(matches!(
            spectrum_circuit(&real(&[0.5, 0.5, 0.5, 0.5]), part, &gs),
            Err(Error::TooManyCoefficients { .. })
        ));
        assert!(matches!(
            spectrum_circuit(&real(&[0.5, 0.5]), part, &gs),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn narrow_b_side_copies_low_qubits() {
        let gs = GateSet::standard();
        let part = BipartitePartition::new(2, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = spectrum_circuit(&real(&[s, s]), part, &gs).unwrap();
        let psi = apply_circuit(&c, &gs, &PureState::zero(3)).unwrap();
        let rho = partial_trace(&psi, part, Side::A).unwrap();
        let target = DensityMatrix::diagonal(2, &[0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(trace_distance(&rho, &target).unwrap() < 1e-12);
        assert!(spectrum_circuit(&real(&[s, 0.0, s]), part, &gs).is_err());
    }

    #[test]
    fn generic_composition() {
        let gs = GateSet::standard();
        let part = BipartitePartition::new(1, 1).unwrap();
        let empty = Circuit::new(2);
        assert_eq!(
            generic_state_circuit(&empty, &empty, &empty, part)
                .unwrap()
                .gate_count(),
            0
        );

        let us = spectrum_circuit(&real(&[0.7f64.sqrt(), 0.3f64.sqrt()]), part, &gs).unwrap();
        let mut ua = Circuit::new(2);
        ua.push_gate("H", &[0]).unwrap();
        let full = generic_state_circuit(&us, &ua, &empty, part).unwrap();
        assert_eq!(full.gate_count(), us.gate_count() + 1);
        let psi = apply_circuit(&full, &gs, &PureState::zero(2)).unwrap();
        let sd = schmidt_decompose(&psi, part).unwrap();
        assert_abs_diff_eq!(sd.coefficients[0], 0.7f64.sqrt(), epsilon = 1e-9);
        // the dominant A-side Schmidt vector is H|0⟩ = |+⟩
        let plus = PureState::normalized(1, real(&[1.0, 1.0])).unwrap();
        assert!(crate::qstate::fidelity(&sd.basis_a[0], &plus).unwrap() > 1.0 - 1e-9);

        let mut bad = Circuit::new(2);
        bad.push_gate("H", &[1]).unwrap();
        assert!(matches!(
            generic_state_circuit(&us, &bad, &empty, part),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn local_circuits_commute() {
        let gs = GateSet::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let part = BipartitePartition::new(2, 2).unwrap();
        for _ in 0..20 {
            let mut ua = Circuit::new(4);
            let mut ub = Circuit::new(4);
            for _ in 0..6 {
                let g = ["H", "T", "Tdg", "X"][rng.gen_range(0..4)];
                ua.push_gate(g, &[rng.gen_range(0..2)]).unwrap();
                ub.push_gate(g, &[rng.gen_range(2..4)]).unwrap();
            }
            ua.push_gate("CNOT", &[0, 1]).unwrap();
            ub.push_gate("CNOT", &[3, 2]).unwrap();
            let psi = PureState::random(4, &mut rng);
            let empty = Circuit::new(4);
            let ab = generic_state_circuit(&empty, &ua, &ub, part).unwrap();
            let ba = ub.then(&ua).unwrap();
            let x = apply_circuit(&ab, &gs, &psi).unwrap();
            let y = apply_circuit(&ba, &gs, &psi).unwrap();
            for (p, q) in x.amplitudes().iter().zip(y.amplitudes()) {
                assert!((p - q).norm() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn spectrum_circuit_bound_and_diagonality(seed in any::<u64>(), n_a in 1usize..4) {
            let gs = GateSet::standard();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let part = BipartitePartition::new(n_a, n_a).unwrap();
            let d = 1usize << n_a;
            let len = rng.gen_range(1..=d);
            let coeffs = PureState::random(n_a, &mut rng).into_amplitudes();
            let mut coeffs = coeffs[..len].to_vec();
            let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            coeffs.iter_mut().for_each(|c| *c /= norm);

            let c = spectrum_circuit(&coeffs, part, &gs).unwrap();
            prop_assert!(c.gate_count() <= d + n_a);
            let psi = apply_circuit(&c, &gs, &PureState::zero(2 * n_a)).unwrap();
            let rho = partial_trace(&psi, part, Side::A).unwrap();
            let mut probs = vec![0.0; d];
            for (i, ci) in coeffs.iter().enumerate() {
                probs[i] = ci.norm_sqr();
            }
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
            let target = DensityMatrix::diagonal(n_a, &probs).unwrap();
            prop_assert!(trace_distance(&rho, &target).unwrap() < 1e-9);
        }
    }
}
