// Purification complexity of single-qubit density matrices, the largest
// value at a fixed spectrum, and the Bell-pair circuit that purifies I/2^n.

use qclab::gates::{bell_pair_circuit, GateSet};
use qclab::mixed::{purification_complexity, PurificationTable};
use qclab::oracle::OracleParams;
use qclab::qstate::{DensityMatrix, Spectrum};

fn main() -> qclab::Result<()> {
    let gs = GateSet::standard();
    let params = OracleParams::new(0.045, 0.3, 400);

    let mixed = DensityMatrix::maximally_mixed(1);
    println!("C(I/2) = {}", purification_complexity(&mixed, &gs, params)?);
    for n in 1..=2 {
        println!(
            "Bell pairs purifying I/2^{n}: {} gates",
            bell_pair_circuit(n, &gs)?.gate_count()
        );
    }

    let mut table = PurificationTable::new(1, 1, &gs, params)?;
    for p in [0.9, 0.7, 0.6, 0.5] {
        let rho = DensityMatrix::diagonal(1, &[p, 1.0 - p])?;
        let spec = Spectrum::from_eigenvalues(&[p, 1.0 - p], 1e-9)?;
        let c = table.complexity(&rho)?;
        let m = table.c_max(&spec)?;
        println!(
            "diag({p}, {:.1}): C = {c}, C_max = {}, uncomplexity {}",
            1.0 - p,
            m.value,
            m.value.minus(c)
        );
    }
    Ok(())
}
