//! Gate sets, circuits and explicit state-preparation constructions.

mod circuit;
mod construct;
mod gateset;
pub(crate) mod kernel;

pub(crate) use circuit::CompiledOp;
pub use circuit::{apply_circuit, gate_count, Circuit, ControlledUnitary, GateApplication, Operation};
pub use construct::{bell_pair_circuit, generic_state_circuit, spectrum_circuit};
pub use gateset::{builtin, Gate, GateSet, GATESET_ENV, UNITARITY_TOL};
