//! Circuits and the branching-program family, with their evaluators and the
//! normalizations the compilers expect.

mod circuit;
mod format;
mod general;
mod layered;

pub use circuit::{Circuit, CircuitBuilder, Gate, Wire};
pub use format::{
    parse_bp, parse_circuit, write_bp, write_circuit, write_general, write_layered,
    write_permutation, AnyBp,
};
pub use general::{BpNode, GeneralBp};
pub use layered::{LayerNode, LayeredBp, PermutationBp};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("input has {got} bits, expected {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}
