// Gate-count complexity of Bell and GHZ states from |0…0⟩ under the default
// gate set {H, T, Tdg, CNOT, X}, with the shortest circuit found.

use qclab::gates::GateSet;
use qclab::oracle::{ComplexityTable, OracleParams};
use qclab::qstate::{fidelity, PureState, C64};

fn ghz(n: usize) -> PureState {
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[(1 << n) - 1] = amps[0];
    PureState::new(n, amps).unwrap()
}

fn main() -> qclab::Result<()> {
    let gs = GateSet::standard();
    let params = OracleParams::default();
    for n in [2, 3] {
        let target = ghz(n);
        let mut table = ComplexityTable::new(PureState::zero(n), gs.clone(), params)?;
        let c = table.complexity(&target)?;
        // the same search, keeping the entry so its circuit can be printed
        let eps = params.epsilon;
        let hit = table
            .search(|a| fidelity(&PureState::new(n, a.to_vec()).unwrap(), &target).unwrap() >= 1.0 - eps)
            .expect("reached within the budget");
        println!("{n}-qubit GHZ: complexity {c}, {} entries explored", table.len());
        println!("{}", table.witness(hit).to_text());
    }
    Ok(())
}
