//! Deterministic automata over finite alphabets: words, complete DFAs and
//! three-valued DFAs, products, minimization, graph analyses and the text
//! and DOT formats.

mod alphabet;
mod automaton;
mod error;
pub mod format;
mod graph;
mod minimize;

pub use alphabet::{Alphabet, Letter, Word};
pub(crate) use automaton::PairTrail;
pub use automaton::{Automaton, Dfa, Label, StateColor, StateId, ThreeDfa};
pub use error::AutomatonError;
