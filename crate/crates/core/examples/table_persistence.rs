// Builds a saturated two-qubit table on a coarse grid, saves it as JSON
// lines, reloads it and answers queries from the reloaded copy.

use qclab::gates::GateSet;
use qclab::oracle::{ComplexityTable, OracleParams};
use qclab::qstate::{PureState, C64};

fn main() -> qclab::Result<()> {
    let gs = GateSet::standard();
    let params = OracleParams::new(0.045, 0.3, 400);
    let table = ComplexityTable::build(PureState::zero(2), gs.clone(), params)?;
    println!(
        "built: {} entries, growth {:?}, eccentricity {}",
        table.len(),
        table.growth(),
        table.max_pure_complexity()
    );

    let path = std::env::temp_dir().join("qclab-two-qubit.jsonl");
    table.save(&path)?;
    let bytes = std::fs::metadata(&path)?.len();
    let loaded = ComplexityTable::load(&path, &gs, None)?;
    println!(
        "reloaded {} entries from {} ({bytes} bytes)",
        loaded.len(),
        path.display()
    );

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let bell = PureState::new(2, vec![C64::new(s, 0.0), z, z, C64::new(s, 0.0)])?;
    let plus_zero = PureState::new(2, vec![C64::new(s, 0.0), z, C64::new(s, 0.0), z])?;
    println!("Bell: {}", loaded.lookup(&bell)?);
    println!("|+0>: {}", loaded.lookup(&plus_zero)?);

    // a table is tied to its gate set
    let other = GateSet::from_labels("h-cnot", &["H", "CNOT"])?;
    match ComplexityTable::load(&path, &other, None) {
        Err(e) => println!("loading with another gate set fails: {e}"),
        Ok(_) => println!("unexpected: mismatched gate set accepted"),
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
