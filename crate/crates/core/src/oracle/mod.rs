//! Breadth-first ε-complexity oracle over all circuits from a finite gate set.

mod index;
mod persist;
mod table;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gates::GateSet;
use crate::qstate::{BipartitePartition, PureState, Spectrum};

pub(crate) use index::{Embedded, NeighborIndex};
pub use table::{ComplexityTable, Growth};

/// Tolerances and limits shared by every table build.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    /// A state is accepted when its fidelity with the target is ≥ 1 − ε.
    pub epsilon: f64,
    /// Quantization cell of the canonical key.
    pub grid: f64,
    /// Maximum circuit depth explored.
    pub budget: u32,
    /// Hard limit on table entries.
    pub max_entries: usize,
    /// Worker threads for frontier expansion; `None` uses all cores.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            grid: 1e-3,
            budget: 12,
            max_entries: 50_000_000,
            workers: None,
        }
    }
}

impl OracleParams {
    pub fn new(epsilon: f64, grid: f64, budget: u32) -> Self {
        Self {
            epsilon,
            grid,
            budget,
            ..Self::default()
        }
    }

    pub fn with_max_entries(mut self, max_entries: usize) -> Self {
        self.max_entries = max_entries;
        self
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_budget(mut self, budget: u32) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.grid.is_nan() || self.grid <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "grid must be positive, got {}",
                self.grid
            )));
        }
        // a coarser grid could merge states that the tolerance distinguishes
        if self.grid > (2.0 * self.epsilon).sqrt() * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "grid {} exceeds sqrt(2·epsilon) = {}",
                self.grid,
                (2.0 * self.epsilon).sqrt()
            )));
        }
        if self.max_entries == 0 {
            return Err(Error::InvalidParameter("max_entries must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("workers must be positive".into()));
        }
        Ok(())
    }

    /// Trace-distance tolerance for density matrices. Two pure states with
    /// fidelity `1 − ε` are at trace distance `√ε`, so this is the value that
    /// keeps mixed-state acceptance consistent with pure-state acceptance.
    pub fn density_tolerance(&self) -> f64 {
        self.epsilon.sqrt()
    }
}

/// Minimal gate count, or a marker for why none was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Complexity {
    Exact(u32),
    /// No match up to this depth in a table that was not closed.
    ExceedsBudget(u32),
    /// The table is closed and nothing in it matches.
    Unreachable,
}

impl Complexity {
    pub fn value(self) -> Option<u32> {
        match self {
            Complexity::Exact(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Complexity::Exact(_))
    }

    /// `self − other` when both are exact.
    pub fn minus(self, other: Complexity) -> ComplexityDiff {
        match (self, other) {
            (Complexity::Exact(a), Complexity::Exact(b)) => ComplexityDiff::Defined(a as i64 - b as i64),
            _ => ComplexityDiff::Undefined,
        }
    }

    /// Larger of two values; any non-exact input makes the result non-exact.
    pub fn max(self, other: Complexity) -> Complexity {
        match (self, other) {
            (Complexity::Exact(a), Complexity::Exact(b)) => Complexity::Exact(a.max(b)),
            (Complexity::Exact(_), x) | (x, Complexity::Exact(_)) => x,
            (Complexity::ExceedsBudget(a), Complexity::ExceedsBudget(b)) => Complexity::ExceedsBudget(a.max(b)),
            (Complexity::ExceedsBudget(a), _) | (_, Complexity::ExceedsBudget(a)) => Complexity::ExceedsBudget(a),
            _ => Complexity::Unreachable,
        }
    }
}

impl fmt::Display for Complexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Complexity::Exact(v) => write!(f, "{v}"),
            Complexity::ExceedsBudget(b) => write!(f, "exceeds budget {b}"),
            Complexity::Unreachable => write!(f, "unreachable"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ComplexityRepr {
    Exact(u32),
    Exceeds { exceeds_budget: u32 },
    Unreachable { unreachable: bool },
}

impl Serialize for Complexity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Complexity::Exact(v) => ComplexityRepr::Exact(v),
            Complexity::ExceedsBudget(b) => ComplexityRepr::Exceeds { exceeds_budget: b },
            Complexity::Unreachable => ComplexityRepr::Unreachable { unreachable: true },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Complexity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match ComplexityRepr::deserialize(d)? {
            ComplexityRepr::Exact(v) => Complexity::Exact(v),
            ComplexityRepr::Exceeds { exceeds_budget } => Complexity::ExceedsBudget(exceeds_budget),
            ComplexityRepr::Unreachable { .. } => Complexity::Unreachable,
        })
    }
}

/// Difference of two complexities; undefined unless both are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComplexityDiff {
    Defined(i64),
    Undefined,
}

impl ComplexityDiff {
    pub fn value(self) -> Option<i64> {
        match self {
            ComplexityDiff::Defined(v) => Some(v),
            ComplexityDiff::Undefined => None,
        }
    }
}

impl fmt::Display for ComplexityDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexityDiff::Defined(v) => write!(f, "{v}"),
            ComplexityDiff::Undefined => write!(f, "undefined"),
        }
    }
}

impl Serialize for ComplexityDiff {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            ComplexityDiff::Defined(v) => s.serialize_i64(v),
            ComplexityDiff::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for ComplexityDiff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Value(i64),
            Marker(String),
        }
        match Repr::deserialize(d)? {
            Repr::Value(v) => Ok(ComplexityDiff::Defined(v)),
            Repr::Marker(m) if m == "undefined" => Ok(ComplexityDiff::Undefined),
            Repr::Marker(m) => Err(serde::de::Error::custom(format!("unexpected marker `{m}`"))),
        }
    }
}

/// Builds the table from `reference` up to the parameter budget.
pub fn build_table(reference: &PureState, gs: &GateSet, params: OracleParams) -> Result<ComplexityTable> {
    ComplexityTable::build(reference.clone(), gs.clone(), params)
}

/// Minimal depth of an entry within fidelity `1 − ε` of `target`, growing
/// the table lazily as far as the budget allows.
pub fn state_complexity(target: &PureState, table: &mut ComplexityTable) -> Result<Complexity> {
    table.complexity(target)
}

/// Largest ε-complexity over the table's representatives; only meaningful
/// for a saturated table.
pub fn max_pure_complexity(table: &ComplexityTable) -> Complexity {
    table.max_pure_complexity()
}

/// Complexity of `target` starting from `reference` instead of `|0…0⟩`.
pub fn relative_complexity(
    target: &PureState,
    reference: &PureState,
    gs: &GateSet,
    params: OracleParams,
) -> Result<Complexity> {
    if target.n_qubits() != reference.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: reference.dim(),
            found: target.dim(),
        });
    }
    let mut table = ComplexityTable::new(reference.clone(), gs.clone(), params)?;
    table.complexity(target)
}

/// Entries whose `A` reduction has spectrum `spec` within `tol`, with depths,
/// in table order.
pub fn enumerate_states_with_spectrum(
    table: &ComplexityTable,
    part: BipartitePartition,
    spec: &Spectrum,
    tol: f64,
) -> Result<Vec<(PureState, u32)>> {
    part.check(table.n_qubits())?;
    if spec.n_qubits() != part.n_a {
        return Err(Error::DimensionMismatch {
            expected: part.dim_a(),
            found: spec.dim(),
        });
    }
    if spec.schmidt_number() > part.dim_b() {
        return Ok(Vec::new());
    }
    let target = spec.eigenvalues();
    let mut out = Vec::new();
    for i in 0..table.len() {
        let eig = table::reduced_eigenvalues(table.amplitudes(i), part);
        if crate::qstate::spectrum_deviation(&eig, target) <= tol {
            out.push((table.representative(i), table.depth(i)));
        }
    }
    Ok(out)
}
