use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::kernel;
use super::GateSet;
use crate::error::{Error, Result};
use crate::qstate::{PureState, C64};

/// A gate-set gate applied to an ordered list of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct GateApplication {
    pub label: String,
    pub targets: Vec<usize>,
}

/// A 2×2 unitary on `target` conditioned on control qubits holding given
/// values. Used by constructive circuits whose rotations are not part of a
/// finite alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledUnitary {
    pub controls: Vec<(usize, bool)>,
    pub target: usize,
    pub matrix: [C64; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operation {
    Gate(GateApplication),
    Controlled(ControlledUnitary),
}

impl Operation {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Operation::Gate(g) => g.targets.clone(),
            Operation::Controlled(c) => c
                .controls
                .iter()
                .map(|&(q, _)| q)
                .chain(std::iter::once(c.target))
                .collect(),
        }
    }

    fn shifted(&self, offset: usize) -> Operation {
        match self {
            Operation::Gate(g) => Operation::Gate(GateApplication {
                label: g.label.clone(),
                targets: g.targets.iter().map(|q| q + offset).collect(),
            }),
            Operation::Controlled(c) => Operation::Controlled(ControlledUnitary {
                controls: c.controls.iter().map(|&(q, v)| (q + offset, v)).collect(),
                target: c.target + offset,
                matrix: c.matrix,
            }),
        }
    }
}

/// Ordered list of operations on `n_qubits` qubits; the first op acts first.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<Operation>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Appends a gate-set gate after validating its targets.
    pub fn push_gate(&mut self, label: impl Into<String>, targets: &[usize]) -> Result<&mut Self> {
        self.check_targets(targets)?;
        self.ops.push(Operation::Gate(GateApplication {
            label: label.into(),
            targets: targets.to_vec(),
        }));
        Ok(self)
    }

    pub fn push_controlled(&mut self, op: ControlledUnitary) -> Result<&mut Self> {
        let qubits: Vec<usize> = op
            .controls
            .iter()
            .map(|&(q, _)| q)
            .chain(std::iter::once(op.target))
            .collect();
        self.check_targets(&qubits)?;
        self.ops.push(Operation::Controlled(op));
        Ok(self)
    }

    pub(crate) fn push_op(&mut self, op: Operation) -> Result<&mut Self> {
        self.check_targets(&op.qubits())?;
        self.ops.push(op);
        Ok(self)
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        if targets.is_empty() {
            return Err(Error::InvalidTargets("no target qubits".into()));
        }
        let mut seen = BTreeSet::new();
        for &q in targets {
            if q >= self.n_qubits {
                return Err(Error::InvalidTargets(format!(
                    "qubit {q} outside a {}-qubit register",
                    self.n_qubits
                )));
            }
            if !seen.insert(q) {
                return Err(Error::InvalidTargets(format!("qubit {q} repeated")));
            }
        }
        Ok(())
    }

    /// Qubits touched by any op.
    pub fn support(&self) -> BTreeSet<usize> {
        self.ops.iter().flat_map(|op| op.qubits()).collect()
    }

    /// This circuit followed by `next`.
    pub fn then(&self, next: &Circuit) -> Result<Circuit> {
        if next.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: next.n_qubits,
            });
        }
        let mut out = self.clone();
        out.ops.extend(next.ops.iter().cloned());
        Ok(out)
    }

    /// Re-indexes onto a `total`-qubit register, qubit `q` becoming `q + offset`.
    pub fn embed(&self, offset: usize, total: usize) -> Result<Circuit> {
        if offset + self.n_qubits > total {
            return Err(Error::InvalidTargets(format!(
                "{} qubits at offset {offset} exceed a {total}-qubit register",
                self.n_qubits
            )));
        }
        Ok(Circuit {
            n_qubits: total,
            ops: self.ops.iter().map(|op| op.shifted(offset)).collect(),
        })
    }

    /// Number of operations.
    pub fn gate_count(&self) -> usize {
        self.ops.len()
    }

    /// Plain-text form: a `# qubits: N` header, then one `LABEL q0 [q1]` line
    /// per gate. Controlled unitaries use
    /// `CU <q:v,...|-> <target> <re,im> <re,im> <re,im> <re,im>`.
    pub fn to_text(&self) -> String {
        let mut s = format!("# qubits: {}\n", self.n_qubits);
        for op in &self.ops {
            match op {
                Operation::Gate(g) => {
                    s.push_str(&g.label);
                    for q in &g.targets {
                        let _ = write!(s, " {q}");
                    }
                }
                Operation::Controlled(c) => {
                    let ctrl = if c.controls.is_empty() {
                        "-".to_string()
                    } else {
                        c.controls
                            .iter()
                            .map(|&(q, v)| format!("{q}:{}", v as u8))
                            .collect::<Vec<_>>()
                            .join(",")
                    };
                    let _ = write!(s, "CU {ctrl} {}", c.target);
                    for z in &c.matrix {
                        let _ = write!(s, " {:e},{:e}", z.re, z.im);
                    }
                }
            }
            s.push('\n');
        }
        s
    }

    /// Parses [`Self::to_text`] output or hand-written gate lists. Without a
    /// `# qubits:` header the register size is `n_qubits` if given, else the
    /// largest target plus one.
    pub fn from_text(text: &str, n_qubits: Option<usize>) -> Result<Circuit> {
        let mut declared = n_qubits;
        let mut ops = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("qubits:") {
                    let n = v
                        .trim()
                        .parse()
                        .map_err(|_| err(format!("bad qubit count `{}`", v.trim())))?;
                    declared.get_or_insert(n);
                }
                continue;
            }
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let label = tokens.next().expect("nonempty line");
            let parse_q = |t: &str| -> Result<usize> { t.parse().map_err(|_| err(format!("bad qubit index `{t}`"))) };
            if label == "CU" {
                let ctrl = tokens.next().ok_or_else(|| err("missing controls".into()))?;
                let controls = if ctrl == "-" {
                    Vec::new()
                } else {
                    ctrl.split(',')
                        .map(|c| {
                            let (q, v) = c.split_once(':').ok_or_else(|| err(format!("bad control `{c}`")))?;
                            let v = match v {
                                "0" => false,
                                "1" => true,
                                _ => return Err(err(format!("bad control value `{v}`"))),
                            };
                            Ok((parse_q(q)?, v))
                        })
                        .collect::<Result<Vec<_>>>()?
                };
                let target = parse_q(tokens.next().ok_or_else(|| err("missing target".into()))?)?;
                let mut matrix = [C64::new(0.0, 0.0); 4];
                for slot in matrix.iter_mut() {
                    let t = tokens.next().ok_or_else(|| err("missing matrix entry".into()))?;
                    let (re, im) = t
                        .split_once(',')
                        .ok_or_else(|| err(format!("bad complex entry `{t}`")))?;
                    *slot = C64::new(
                        re.parse().map_err(|_| err(format!("bad number `{re}`")))?,
                        im.parse().map_err(|_| err(format!("bad number `{im}`")))?,
                    );
                }
                ops.push((
                    line_no,
                    Operation::Controlled(ControlledUnitary {
                        controls,
                        target,
                        matrix,
                    }),
                ));
            } else {
                let targets = tokens.map(parse_q).collect::<Result<Vec<_>>>()?;
                if targets.is_empty() {
                    return Err(err(format!("gate `{label}` has no targets")));
                }
                ops.push((
                    line_no,
                    Operation::Gate(GateApplication {
                        label: label.to_string(),
                        targets,
                    }),
                ));
            }
        }
        let n = declared.unwrap_or_else(|| ops.iter().flat_map(|(_, op)| op.qubits()).max().map_or(1, |m| m + 1));
        let mut c = Circuit::new(n);
        for (line, op) in ops {
            c.push_op(op).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
        Ok(c)
    }
}

/// An operation resolved against a gate set, ready to run.
#[derive(Clone, Debug)]
pub(crate) enum CompiledOp {
    One {
        q: usize,
        m: [C64; 4],
    },
    Two {
        q0: usize,
        q1: usize,
        m: [C64; 16],
    },
    Controlled {
        mask: usize,
        value: usize,
        target: usize,
        m: [C64; 4],
    },
}

impl CompiledOp {
    pub(crate) fn resolve(op: &Operation, gs: &GateSet, n_qubits: usize) -> Result<CompiledOp> {
        match op {
            Operation::Gate(g) => {
                let gate = gs.get(&g.label).ok_or_else(|| Error::UnknownGate(g.label.clone()))?;
                if gate.arity != g.targets.len() {
                    return Err(Error::InvalidTargets(format!(
                        "gate `{}` has arity {} but {} targets",
                        g.label,
                        gate.arity,
                        g.targets.len()
                    )));
                }
                Ok(match gate.arity {
                    1 => CompiledOp::One {
                        q: g.targets[0],
                        m: gate.matrix.clone().try_into().expect("2x2"),
                    },
                    _ => CompiledOp::Two {
                        q0: g.targets[0],
                        q1: g.targets[1],
                        m: gate.matrix.clone().try_into().expect("4x4"),
                    },
                })
            }
            Operation::Controlled(c) => {
                let mut mask = 0;
                let mut value = 0;
                for &(q, v) in &c.controls {
                    let b = kernel::bit(n_qubits, q);
                    mask |= b;
                    if v {
                        value |= b;
                    }
                }
                Ok(CompiledOp::Controlled {
                    mask,
                    value,
                    target: c.target,
                    m: c.matrix,
                })
            }
        }
    }

    #[inline]
    pub(crate) fn apply(&self, amps: &mut [C64], n_qubits: usize) {
        match self {
            CompiledOp::One { q, m } => kernel::apply_1q(amps, n_qubits, *q, m),
            CompiledOp::Two { q0, q1, m } => kernel::apply_2q(amps, n_qubits, *q0, *q1, m),
            CompiledOp::Controlled { mask, value, target, m } => {
                kernel::apply_controlled(amps, n_qubits, *mask, *value, *target, m)
            }
        }
    }
}

/// Runs `circuit` on `state`, resolving gate labels in `gs`.
pub fn apply_circuit(circuit: &Circuit, gs: &GateSet, state: &PureState) -> Result<PureState> {
    if circuit.n_qubits() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << circuit.n_qubits(),
            found: state.dim(),
        });
    }
    let compiled = circuit
        .ops()
        .iter()
        .map(|op| CompiledOp::resolve(op, gs, circuit.n_qubits()))
        .collect::<Result<Vec<_>>>()?;
    let mut out = state.clone();
    for op in &compiled {
        op.apply(out.amplitudes_mut(), circuit.n_qubits());
    }
    Ok(out)
}

/// Gate count of a circuit.
pub fn gate_count(circuit: &Circuit) -> usize {
    circuit.gate_count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::fidelity;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(
            2,
            vec![
                C64::new(s, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_circuit_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = PureState::random(3, &mut rng);
        let out = apply_circuit(&Circuit::new(3), &GateSet::standard(), &psi).unwrap();
        assert_eq!(out, psi);
        assert_eq!(gate_count(&Circuit::new(3)), 0);
    }

    #[test]
    fn hadamard_makes_plus() {
        let mut c = Circuit::new(1);
        c.push_gate("H", &[0]).unwrap();
        let out = apply_circuit(&c, &GateSet::standard(), &PureState::zero(1)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitudes()[0].re - s).abs() < 1e-15);
        assert!((out.amplitudes()[1].re - s).abs() < 1e-15);
    }

    #[test]
    fn hadamard_cnot_makes_bell() {
        let mut c = Circuit::new(2);
        c.push_gate("H", &[0]).unwrap().push_gate("CNOT", &[0, 1]).unwrap();
        let out = apply_circuit(&c, &GateSet::standard(), &PureState::zero(2)).unwrap();
        assert!(fidelity(&out, &bell()).unwrap() > 1.0 - 1e-15);
    }

    #[test]
    fn errors() {
        let gs = GateSet::standard();
        let mut c = Circuit::new(2);
        assert!(c.push_gate("H", &[2]).is_err());
        assert!(c.push_gate("CNOT", &[1, 1]).is_err());
        c.push_gate("Q", &[0]).unwrap();
        assert!(matches!(
            apply_circuit(&c, &gs, &PureState::zero(2)),
            Err(Error::UnknownGate(_))
        ));
        assert!(apply_circuit(&Circuit::new(2), &gs, &PureState::zero(3)).is_err());
        let mut c = Circuit::new(2);
        c.push_gate("H", &[0, 1]).unwrap();
        assert!(apply_circuit(&c, &gs, &PureState::zero(2)).is_err());
    }

    #[test]
    fn text_format() {
        let text = "# a Bell pair\nH 0\nCNOT 0 1  # entangle\n\n";
        let c = Circuit::from_text(text, None).unwrap();
        assert_eq!(c.n_qubits(), 2);
        assert_eq!(c.gate_count(), 2);
        let back = Circuit::from_text(&c.to_text(), None).unwrap();
        assert_eq!(back, c);
        let err = Circuit::from_text("H 0\nCNOT 0 x\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn controlled_ops_round_trip_through_text() {
        let mut c = Circuit::new(3);
        c.push_controlled(ControlledUnitary {
            controls: vec![(0, true), (1, false)],
            target: 2,
            matrix: [
                C64::new(0.6, 0.0),
                C64::new(-0.8, 0.0),
                C64::new(0.8, 0.0),
                C64::new(0.6, 0.0),
            ],
        })
        .unwrap();
        let back = Circuit::from_text(&c.to_text(), None).unwrap();
        assert_eq!(back, c);
    }

    proptest! {
        #[test]
        fn random_circuits_preserve_norm(seed in any::<u64>(), len in 0usize..40) {
            use rand::Rng;
            let gs = GateSet::standard();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = Circuit::new(3);
            for _ in 0..len {
                let g = &gs.gates()[rng.gen_range(0..gs.gates().len())];
                let q0 = rng.gen_range(0..3);
                if g.arity == 1 {
                    c.push_gate(g.label.clone(), &[q0]).unwrap();
                } else {
                    let q1 = (q0 + rng.gen_range(1..3)) % 3;
                    c.push_gate(g.label.clone(), &[q0, q1]).unwrap();
                }
            }
            let out = apply_circuit(&c, &gs, &PureState::random(3, &mut rng)).unwrap();
            let norm: f64 = out.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
