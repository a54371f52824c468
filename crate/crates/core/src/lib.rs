//! Benenson automata toolchain.

pub mod automaton;
pub mod barrington;
pub mod compiler;
pub mod extractor;
pub mod fixtures;
pub mod gen;
pub mod machines;
pub mod perm;
pub mod text;
pub mod verify;
pub mod wetlab;
