// The spectrum-loading circuit: rotations build Σ c_i|i⟩ on A, CNOTs copy it
// to B, and the reduction of A ends up with eigenvalues |c_i|².

use qclab::gates::{apply_circuit, builtin, spectrum_circuit, GateSet};
use qclab::qstate::{partial_trace, BipartitePartition, PureState, Side, C64};
use rand::{Rng, SeedableRng};

fn main() -> qclab::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let gs = GateSet::new("cnot", vec![builtin("CNOT").unwrap()])?;
    for (n_a, n_b) in [(1, 1), (2, 2)] {
        let part = BipartitePartition::new(n_a, n_b)?;
        let raw: Vec<f64> = (0..1 << n_a).map(|_| rng.gen::<f64>()).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let coeffs: Vec<C64> = raw.iter().map(|x| C64::new(x / norm, 0.0)).collect();

        let circuit = spectrum_circuit(&coeffs, part, &gs)?;
        let out = apply_circuit(&circuit, &gs, &PureState::zero(part.n_qubits()))?;
        let got = partial_trace(&out, part, Side::A)?.eigenvalues();
        let mut want: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
        want.sort_by(|a, b| b.total_cmp(a));
        println!(
            "{n_a}+{n_b}: {} operations (bound {}), target {want:.4?}, reduced {got:.4?}",
            circuit.gate_count(),
            (1 << n_a) + n_a
        );
        println!("{}", circuit.to_text());
    }
    Ok(())
}
