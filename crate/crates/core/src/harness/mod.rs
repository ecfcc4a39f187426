//! Executable experiments over saturated small tables: superadditivity of
//! uncomplexity, the superposition bound, average basis complexity and the
//! degeneracy separation.

mod experiments;
mod report;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{apply_circuit, Circuit, GateSet};
use crate::mixed::{ancilla_qubits, spectrum_of, PurificationTable};
use crate::oracle::{Complexity, ComplexityDiff, ComplexityTable, OracleParams};
use crate::qstate::{partial_trace, BipartitePartition, DensityMatrix, PureState, Side};

pub use experiments::{
    case1_unentangled, case1a_low_schmidt, case2_maximally_entangled, case3_nondegenerate, case4_avg_basis_bounds,
    degeneracy_separation, mixed_bound_corpus, run_experiment, superadditivity_sweep, superposition_property,
    EXPERIMENTS,
};
pub use report::{ExperimentConfig, ExperimentReport, Record, Verdict};

/// Everything an experiment depends on besides its own arguments.
#[derive(Clone, Debug)]
pub struct HarnessConfig {
    pub gate_set: GateSet,
    pub params: OracleParams,
    pub seed: u64,
    /// Number of random instances per sampled experiment.
    pub samples: usize,
    /// Settings for the two-plus-two register, which cannot saturate.
    pub wide_params: OracleParams,
}

impl HarnessConfig {
    /// Coarse grid at which one- and two-qubit tables saturate in about a
    /// second.
    pub fn coarse(gate_set: GateSet) -> Self {
        Self {
            gate_set,
            params: OracleParams::new(0.045, 0.3, 400).with_max_entries(5_000_000),
            seed: 0,
            samples: 200,
            wide_params: OracleParams::new(0.045, 0.3, 6).with_max_entries(20_000),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.params.workers = workers;
        self.wide_params.workers = workers;
        self
    }

    pub(crate) fn rng(&self, stream: u64) -> rand_chacha::ChaCha8Rng {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Runs `f` on a pool with the configured worker count.
    pub(crate) fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> Result<R> {
        match self.params.workers {
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                Ok(pool.install(f))
            }
            None => Ok(f()),
        }
    }
}

/// Tables from `|0…0⟩` shared by the experiments, each explored to its
/// budget before use.
pub struct Lab {
    gate_set: GateSet,
    params: OracleParams,
    pure: BTreeMap<usize, ComplexityTable>,
    purify: BTreeMap<(usize, usize), PurificationTable>,
}

impl Lab {
    pub fn new(gate_set: GateSet, params: OracleParams) -> Self {
        Self {
            gate_set,
            params,
            pure: BTreeMap::new(),
            purify: BTreeMap::new(),
        }
    }

    pub fn gate_set(&self) -> &GateSet {
        &self.gate_set
    }

    pub fn params(&self) -> &OracleParams {
        &self.params
    }

    pub fn ensure_pure(&mut self, n: usize) -> Result<()> {
        if !self.pure.contains_key(&n) {
            let t = ComplexityTable::build(PureState::zero(n), self.gate_set.clone(), self.params)?;
            t.entry_complexities();
            self.pure.insert(n, t);
        }
        Ok(())
    }

    pub fn ensure_purification(&mut self, n_sys: usize, n_anc: usize) -> Result<()> {
        if !self.purify.contains_key(&(n_sys, n_anc)) {
            let mut pt = PurificationTable::new(n_sys, n_anc, &self.gate_set, self.params)?;
            pt.complete();
            pt.entry_complexities();
            self.purify.insert((n_sys, n_anc), pt);
        }
        Ok(())
    }

    /// Every table a superadditivity check on `part` can touch.
    pub fn ensure_bipartite(&mut self, part: BipartitePartition) -> Result<()> {
        self.ensure_pure(part.n_qubits())?;
        let max_rank = part.dim_a().min(part.dim_b());
        for n in [part.n_a, part.n_b] {
            for anc in 0..=ancilla_qubits(max_rank) {
                self.ensure_purification(n, anc)?;
            }
        }
        Ok(())
    }

    /// A table prepared by [`Self::ensure_pure`].
    pub fn pure(&self, n: usize) -> Result<&ComplexityTable> {
        self.pure
            .get(&n)
            .ok_or_else(|| Error::InvalidParameter(format!("no {n}-qubit table prepared")))
    }

    /// A table prepared by [`Self::ensure_purification`].
    pub fn purification(&self, n_sys: usize, n_anc: usize) -> Result<&PurificationTable> {
        self.purify
            .get(&(n_sys, n_anc))
            .ok_or_else(|| Error::InvalidParameter(format!("no {n_sys}+{n_anc} purification table prepared")))
    }

    /// ε-complexity of a pure state from the prepared table.
    pub fn pure_complexity(&self, psi: &PureState) -> Result<Complexity> {
        self.pure(psi.n_qubits())?.lookup(psi)
    }

    /// Purification complexity, `C_max` of the spectrum, and their
    /// difference.
    pub fn mixed_delta(&self, rho: &DensityMatrix) -> Result<(Complexity, Complexity, ComplexityDiff)> {
        let spec = spectrum_of(rho)?;
        let pt = self.purification(rho.n_qubits(), ancilla_qubits(spec.schmidt_number()))?;
        let c = pt.lookup(rho)?;
        let m = pt.c_max_built(&spec)?.value;
        Ok((c, m, m.minus(c)))
    }
}

/// Outcome of comparing `ΔC(ψ)` with `ΔC(ρ_A) + ΔC(ρ_B)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperadditivityRecord {
    pub label: String,
    pub c_total: Complexity,
    pub c_max_total: Complexity,
    pub c_a: Complexity,
    pub c_max_a: Complexity,
    pub c_b: Complexity,
    pub c_max_b: Complexity,
    pub delta_total: ComplexityDiff,
    pub delta_a: ComplexityDiff,
    pub delta_b: ComplexityDiff,
    pub verdict: Verdict,
    /// `ΔC_total − ΔC_A − ΔC_B` when every term is defined.
    pub gap: Option<i64>,
    /// Circuit text preparing the state, attached to violations.
    pub witness: Option<String>,
}

impl SuperadditivityRecord {
    pub fn to_record(&self) -> Record {
        let mut r = Record::new(&self.label, self.verdict);
        r.gap = self.gap;
        r.witness = self.witness.clone();
        r.set("c_total", self.c_total)
            .set("c_max_total", self.c_max_total)
            .set("c_a", self.c_a)
            .set("c_max_a", self.c_max_a)
            .set("c_b", self.c_b)
            .set("c_max_b", self.c_max_b)
            .set("delta_total", self.delta_total)
            .set("delta_a", self.delta_a)
            .set("delta_b", self.delta_b);
        r
    }
}

/// Checks `ΔC(ψ) ≥ ΔC(ρ_A) + ΔC(ρ_B)` against the lab's tables, which must
/// have been prepared with [`Lab::ensure_bipartite`].
pub fn check_superadditivity(
    psi: &PureState,
    part: BipartitePartition,
    lab: &Lab,
    label: &str,
) -> Result<SuperadditivityRecord> {
    part.check(psi.n_qubits())?;
    let full = lab.pure(psi.n_qubits())?;
    let c_total = full.lookup(psi)?;
    let c_max_total = full.max_pure_complexity();
    let (c_a, c_max_a, delta_a) = lab.mixed_delta(&partial_trace(psi, part, Side::A)?)?;
    let (c_b, c_max_b, delta_b) = lab.mixed_delta(&partial_trace(psi, part, Side::B)?)?;
    let delta_total = c_max_total.minus(c_total);
    let gap = match (delta_total, delta_a, delta_b) {
        (ComplexityDiff::Defined(t), ComplexityDiff::Defined(a), ComplexityDiff::Defined(b)) => Some(t - a - b),
        _ => None,
    };
    let verdict = match gap {
        Some(g) if g >= 0 => Verdict::Holds,
        Some(_) => Verdict::Violated,
        None => Verdict::Undecided,
    };
    Ok(SuperadditivityRecord {
        label: label.to_string(),
        c_total,
        c_max_total,
        c_a,
        c_max_a,
        c_b,
        c_max_b,
        delta_total,
        delta_a,
        delta_b,
        verdict,
        gap,
        witness: None,
    })
}

/// Random word of `len` gates drawn uniformly from `gs`, placed uniformly on
/// `support`. Two-qubit gates are skipped when the support has one qubit.
pub fn random_circuit<R: Rng + ?Sized>(gs: &GateSet, n: usize, support: &[usize], len: usize, rng: &mut R) -> Circuit {
    let usable: Vec<_> = gs.gates().iter().filter(|g| g.arity <= support.len()).collect();
    let mut c = Circuit::new(n);
    for _ in 0..len {
        let g = usable[rng.gen_range(0..usable.len())];
        let a = support[rng.gen_range(0..support.len())];
        let targets = if g.arity == 1 {
            vec![a]
        } else {
            let rest: Vec<usize> = support.iter().copied().filter(|&q| q != a).collect();
            vec![a, rest[rng.gen_range(0..rest.len())]]
        };
        c.push_gate(g.label.clone(), &targets)
            .expect("targets drawn from the register");
    }
    c
}

/// `circuit` applied to `|i⟩` for each computational-basis index `i`.
pub(crate) fn circuit_basis(circuit: &Circuit, gs: &GateSet) -> Result<Vec<PureState>> {
    let n = circuit.n_qubits();
    (0..1usize << n)
        .map(|i| apply_circuit(circuit, gs, &PureState::basis(n, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::C64;

    #[test]
    fn reference_and_bell_pair_hold() {
        let cfg = HarnessConfig::coarse(GateSet::standard());
        let mut lab = Lab::new(cfg.gate_set.clone(), cfg.params);
        let part = BipartitePartition::new(1, 1).unwrap();
        lab.ensure_bipartite(part).unwrap();

        let r = check_superadditivity(&PureState::zero(2), part, &lab, "zero").unwrap();
        assert_eq!(r.c_total, Complexity::Exact(0));
        assert_eq!(r.delta_total.value(), r.c_max_total.value().map(i64::from));
        assert_eq!(r.delta_a, r.delta_b);
        assert_eq!(r.verdict, Verdict::Holds);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::new(
            2,
            vec![
                C64::new(s, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
            ],
        )
        .unwrap();
        let r = check_superadditivity(&bell, part, &lab, "bell").unwrap();
        assert_eq!(r.delta_a, ComplexityDiff::Defined(0));
        assert_eq!(r.delta_b, ComplexityDiff::Defined(0));
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn unsaturated_tables_leave_verdicts_undecided() {
        let cfg = HarnessConfig::coarse(GateSet::standard());
        let mut lab = Lab::new(cfg.gate_set.clone(), OracleParams::new(1e-4, 1e-2, 2));
        let part = BipartitePartition::new(1, 1).unwrap();
        lab.ensure_bipartite(part).unwrap();
        let r = check_superadditivity(&PureState::zero(2), part, &lab, "zero").unwrap();
        assert_eq!(r.verdict, Verdict::Undecided);
        assert_eq!(r.gap, None);
    }
}
