// Superadditivity of uncomplexity, ΔC(ψ) ≥ ΔC(ρ_A) + ΔC(ρ_B), on a few
// two-qubit states against saturated tables.

use qclab::gates::GateSet;
use qclab::harness::{check_superadditivity, HarnessConfig, Lab};
use qclab::qstate::{BipartitePartition, PureState, C64};

fn main() -> qclab::Result<()> {
    let cfg = HarnessConfig::coarse(GateSet::standard());
    let part = BipartitePartition::new(1, 1)?;
    let mut lab = Lab::new(cfg.gate_set.clone(), cfg.params);
    lab.ensure_bipartite(part)?;

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let states = [
        ("|00>", PureState::zero(2)),
        (
            "Bell",
            PureState::new(2, vec![C64::new(s, 0.0), z, z, C64::new(s, 0.0)])?,
        ),
        (
            "|+0>",
            PureState::new(2, vec![C64::new(s, 0.0), z, C64::new(s, 0.0), z])?,
        ),
        ("deepest", {
            let t = lab.pure(2)?;
            t.representative(t.len() - 1)
        }),
    ];
    for (label, psi) in states {
        let r = check_superadditivity(&psi, part, &lab, label)?;
        println!(
            "{label:8} ΔC = {}, ΔC_A = {}, ΔC_B = {}: {}",
            r.delta_total,
            r.delta_a,
            r.delta_b,
            r.verdict.as_str()
        );
    }
    Ok(())
}
