use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::key::Fnv128;
use crate::qstate::C64;

/// Allowed deviation of `U†U` from the identity.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Environment variable naming a gate-set file that replaces the built-in set.
pub const GATESET_ENV: &str = "QCLAB_GATESET";

/// One elementary gate: a labelled 2×2 or 4×4 unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub label: String,
    pub arity: usize,
    /// Row-major, `2^arity × 2^arity`.
    pub matrix: Vec<C64>,
}

impl Gate {
    pub fn new(label: impl Into<String>, arity: usize, matrix: Vec<C64>) -> Result<Self> {
        let label = label.into();
        if !(arity == 1 || arity == 2) {
            return Err(Error::InvalidGateSet(format!(
                "gate `{label}` has arity {arity}, expected 1 or 2"
            )));
        }
        let d = 1 << arity;
        if matrix.len() != d * d {
            return Err(Error::InvalidGateSet(format!(
                "gate `{label}` needs {} matrix entries, found {}",
                d * d,
                matrix.len()
            )));
        }
        let gate = Self { label, arity, matrix };
        let dev = gate.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(Error::InvalidGateSet(format!(
                "gate `{}` is not unitary (deviation {dev:e})",
                gate.label
            )));
        }
        Ok(gate)
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    /// `max |(U†U − I)_{ij}|`
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim();
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..d {
                    s += m[k * d + i].conj() * m[k * d + j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    /// `U†`
    pub fn adjoint_matrix(&self) -> Vec<C64> {
        let d = self.dim();
        (0..d * d)
            .map(|idx| self.matrix[(idx % d) * d + idx / d].conj())
            .collect()
    }
}

/// Named, finite alphabet of elementary gates.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSet {
    pub name: String,
    gates: Vec<Gate>,
}

impl GateSet {
    pub fn new(name: impl Into<String>, gates: Vec<Gate>) -> Result<Self> {
        let mut seen = HashSet::new();
        for g in &gates {
            if !seen.insert(g.label.as_str()) {
                return Err(Error::InvalidGateSet(format!("duplicate label `{}`", g.label)));
            }
        }
        if gates.is_empty() {
            return Err(Error::InvalidGateSet("gate set is empty".into()));
        }
        Ok(Self {
            name: name.into(),
            gates,
        })
    }

    /// `{H, T, Tdg, CNOT, X}`
    pub fn standard() -> Self {
        Self::from_labels("clifford+t", &["H", "T", "Tdg", "CNOT", "X"]).expect("builtin labels")
    }

    /// Builds a set from the built-in library of named gates.
    pub fn from_labels(name: &str, labels: &[&str]) -> Result<Self> {
        let gates = labels
            .iter()
            .map(|l| builtin(l).ok_or_else(|| Error::UnknownGate(l.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, gates)
    }

    /// Reads `path` if given, else the file named by `QCLAB_GATESET`, else
    /// returns [`Self::standard`].
    pub fn load(path: Option<&Path>) -> Result<Self> {
        if let Some(p) = path {
            return Self::read(p);
        }
        match std::env::var_os(GATESET_ENV) {
            Some(p) if !p.is_empty() => Self::read(Path::new(&p)),
            _ => Ok(Self::standard()),
        }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn get(&self, label: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.label == label)
    }

    pub fn require(&self, label: &str) -> Result<&Gate> {
        self.get(label).ok_or_else(|| Error::MissingGate {
            set: self.name.clone(),
            label: label.to_string(),
        })
    }

    /// True when every gate's adjoint equals (up to global phase) some gate
    /// of the same arity in the set.
    pub fn closed_under_inverses(&self) -> bool {
        self.gates.iter().all(|g| {
            let adj = g.adjoint_matrix();
            self.gates
                .iter()
                .any(|h| h.arity == g.arity && equal_up_to_phase(&h.matrix, &adj))
        })
    }

    /// Stable hex digest of labels and matrices (entries rounded to 1e-12).
    pub fn hash_hex(&self) -> String {
        let mut h = Fnv128::new();
        for g in &self.gates {
            h.write(g.label.as_bytes());
            h.write_u64(g.arity as u64);
            for z in &g.matrix {
                h.write_u64((z.re * 1e12).round() as i64 as u64);
                h.write_u64((z.im * 1e12).round() as i64 as u64);
            }
        }
        format!("{:016x}", h.finish() as u64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GateSetFile::from(self)).expect("plain data serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str::<GateSetFile>(text)?.try_into()
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn equal_up_to_phase(a: &[C64], b: &[C64]) -> bool {
    let Some(k) = a.iter().position(|z| z.norm() > 1e-9) else {
        return false;
    };
    if b[k].norm() < 1e-9 {
        return false;
    }
    let phase = b[k] / a[k];
    a.iter().zip(b).all(|(x, y)| (x * phase - y).norm() < 1e-9)
}

/// Library of standard gates addressable by label.
pub fn builtin(label: &str) -> Option<Gate> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
    let t = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let (arity, m) = match label {
        "H" => (1, vec![c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)]),
        "X" => (1, vec![o, l, l, o]),
        "Y" => (1, vec![o, c(0.0, -1.0), c(0.0, 1.0), o]),
        "Z" => (1, vec![l, o, o, c(-1.0, 0.0)]),
        "S" => (1, vec![l, o, o, c(0.0, 1.0)]),
        "Sdg" => (1, vec![l, o, o, c(0.0, -1.0)]),
        "T" => (1, vec![l, o, o, t]),
        "Tdg" => (1, vec![l, o, o, t.conj()]),
        "CNOT" => (2, vec![l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o]),
        "CZ" => (2, vec![l, o, o, o, o, l, o, o, o, o, l, o, o, o, o, c(-1.0, 0.0)]),
        "SWAP" => (2, vec![l, o, o, o, o, o, l, o, o, l, o, o, o, o, o, l]),
        _ => return None,
    };
    Some(Gate::new(label, arity, m).expect("builtin gates are unitary"))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateSetFile {
    name: String,
    gates: Vec<GateFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateFile {
    label: String,
    arity: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl From<&GateSet> for GateSetFile {
    fn from(gs: &GateSet) -> Self {
        Self {
            name: gs.name.clone(),
            gates: gs
                .gates
                .iter()
                .map(|g| GateFile {
                    label: g.label.clone(),
                    arity: g.arity,
                    matrix: g
                        .matrix
                        .chunks(g.dim())
                        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<GateSetFile> for GateSet {
    type Error = Error;

    fn try_from(f: GateSetFile) -> Result<Self> {
        let gates = f
            .gates
            .into_iter()
            .map(|g| {
                let d = 1usize << g.arity.min(8);
                if g.matrix.len() != d || g.matrix.iter().any(|r| r.len() != d) {
                    return Err(Error::InvalidGateSet(format!(
                        "gate `{}` matrix must be {d}x{d}",
                        g.label
                    )));
                }
                let m = g.matrix.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
                Gate::new(g.label, g.arity, m)
            })
            .collect::<Result<Vec<_>>>()?;
        GateSet::new(f.name, gates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_set_is_unitary_and_inverse_closed() {
        let gs = GateSet::standard();
        assert_eq!(gs.gates().len(), 5);
        for g in gs.gates() {
            assert!(g.unitarity_deviation() < UNITARITY_TOL, "{}", g.label);
        }
        assert!(gs.closed_under_inverses());
        assert!(!GateSet::from_labels("t-only", &["H", "T"])
            .unwrap()
            .closed_under_inverses());
    }

    #[test]
    fn json_round_trip_preserves_hash() {
        let gs = GateSet::standard();
        let back = GateSet::parse(&gs.to_json()).unwrap();
        assert_eq!(back.hash_hex(), gs.hash_hex());
        assert_ne!(GateSet::from_labels("x", &["X"]).unwrap().hash_hex(), gs.hash_hex());
    }

    #[test]
    fn rejects_bad_gates() {
        let c = |re: f64| C64::new(re, 0.0);
        assert!(Gate::new("bad", 1, vec![c(1.0), c(1.0), c(0.0), c(1.0)]).is_err());
        assert!(Gate::new("bad", 3, vec![c(1.0); 64]).is_err());
        let x = builtin("X").unwrap();
        assert!(GateSet::new("dup", vec![x.clone(), x]).is_err());
        let text = r#"{"name": "s", "gates": [{"label": "A", "arity": 1, "matrix": [[[1,0],[0,0]]]}]}"#;
        assert!(GateSet::parse(text).is_err());
    }

    #[test]
    fn missing_gate_is_reported() {
        let gs = GateSet::from_labels("x", &["X"]).unwrap();
        assert!(matches!(gs.require("CNOT"), Err(Error::MissingGate { .. })));
    }
}
