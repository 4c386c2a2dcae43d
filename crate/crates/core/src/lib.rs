//! Learning three-valued automata of failing tests and extracting compact
//! failure explanations from them.

pub mod automata;
pub mod bench;
pub mod extract;
pub mod fixtures;
pub mod lstar;
pub mod oracle;
pub mod pipeline;
pub mod relabel;
pub mod sut;
pub mod test_model;
