// Every mixed-state measure of one density matrix, as the JSON report the
// command-line tool emits.

use qclab::gates::GateSet;
use qclab::mixed::mixed_report;
use qclab::oracle::OracleParams;
use qclab::qstate::DensityMatrix;

fn main() -> qclab::Result<()> {
    let p: f64 = std::env::args()
        .nth(1)
        .map_or(0.7, |s| s.parse().expect("a probability"));
    let rho = DensityMatrix::diagonal(1, &[p, 1.0 - p])?;
    let report = mixed_report(&rho, &GateSet::standard(), OracleParams::new(0.045, 0.3, 400))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
