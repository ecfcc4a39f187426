// A gate set read from JSON: a fixed-angle Y rotation with CNOT. Spectrum
// complexity then meets the loading-circuit bound that the discrete
// Clifford+T set misses.

use qclab::gates::{builtin, Gate, GateSet};
use qclab::mixed::spectrum_complexity;
use qclab::oracle::OracleParams;
use qclab::qstate::{BipartitePartition, Spectrum, C64};

fn main() -> qclab::Result<()> {
    let p: f64 = 0.8;
    let theta = 2.0 * p.sqrt().acos();
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let ry = Gate::new(
        "RY",
        1,
        vec![C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
    )?;
    let rotating = GateSet::new("ry+cnot", vec![ry, builtin("CNOT").unwrap()])?;

    // round trip through the file format
    let rotating = GateSet::parse(&rotating.to_json())?;
    println!("{} (hash {})", rotating.name, rotating.hash_hex());

    let part = BipartitePartition::new(1, 1)?;
    let spec = Spectrum::from_eigenvalues(&[p, 1.0 - p], 1e-9)?;
    let params = OracleParams::new(0.045, 0.3, 12);
    for gs in [rotating, GateSet::standard()] {
        let c = spectrum_complexity(&spec, part, &gs, params)?;
        println!("{:12} C_S(0.8, 0.2) = {c}  (bound {})", gs.name, 2 + 1);
    }
    Ok(())
}
