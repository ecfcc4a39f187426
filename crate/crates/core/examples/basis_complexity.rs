// Basis complexity: the modified reference carries the right Schmidt
// coefficients at minimal cost, and one-sided gates rotate its reduction
// into the target.

use qclab::gates::{apply_circuit, Circuit, GateSet};
use qclab::mixed::{basis_complexity_from, modified_reference_state};
use qclab::oracle::OracleParams;
use qclab::qstate::{partial_trace, BipartitePartition, SchmidtDecomposition, Side, C64};

fn main() -> qclab::Result<()> {
    let gs = GateSet::standard();
    let params = OracleParams::new(0.045, 0.3, 400);
    let part = BipartitePartition::new(1, 1)?;
    let coeffs = [C64::new(0.7f64.sqrt(), 0.0), C64::new(0.3f64.sqrt(), 0.0)];
    let sd = SchmidtDecomposition::from_coefficients(&coeffs, part)?;
    let reference = modified_reference_state(&sd, &gs, params)?;
    println!("modified reference costs {} gates", reference.complexity);

    for text in ["", "H 0", "H 0\nT 0", "H 0\nT 0\nH 0"] {
        let rot = Circuit::from_text(text, Some(2))?;
        let rotated = apply_circuit(&rot, &gs, &reference.state)?;
        let rho = partial_trace(&rotated, part, Side::A)?;
        let c = basis_complexity_from(&rho, &reference.state, part, Side::A, &gs, params)?;
        println!("after [{}]: basis complexity {c}", text.replace('\n', "; "));
    }
    Ok(())
}
