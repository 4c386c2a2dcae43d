//! Systems under test: the execution contract, a simulated system built from
//! automata, the delayed-assertion wrapper, an external-process client and
//! the persistent test repository.

mod adr;
mod external;
mod repo;
mod simulated;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{Alphabet, AutomatonError, Label, Word};

pub use adr::{AdrSut, ASSERT_LETTER};
pub use external::{ExternalSut, DEFAULT_TIMEOUT};
pub use repo::{CachedSut, TestRepo};
pub use simulated::SimulatedSut;

/// Result of executing one test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Passed,
    Failed,
    Invalid,
}

impl Outcome {
    /// Failed tests are the ones to accept, passing tests the ones to
    /// reject, invalid tests are don't-care.
    pub fn label(self) -> Label {
        match self {
            Outcome::Failed => Label::Acc,
            Outcome::Passed => Label::Rej,
            Outcome::Invalid => Label::Dont,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Passed => "passed",
            Outcome::Failed => "failed",
            Outcome::Invalid => "invalid",
        }
    }

    pub fn parse(s: &str) -> Option<Outcome> {
        match s {
            "passed" => Some(Outcome::Passed),
            "failed" => Some(Outcome::Failed),
            "invalid" => Some(Outcome::Invalid),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum SutError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("invalid simulated system: {0}")]
    InvalidSystem(String),
    #[error(
        "nondeterministic system: `{word}` was recorded as {recorded} and now yields {observed}"
    )]
    Integrity {
        word: String,
        recorded: Outcome,
        observed: Outcome,
    },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("test repository {path}: {message}")]
    Repo { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A system that executes test words.
///
/// Implementations must be deterministic, and failures must persist: if `w`
/// fails and `wu` is not invalid then `wu` fails as well.
pub trait Sut: Send + Sync {
    fn alphabet(&self) -> &Alphabet;

    fn execute(&self, word: &Word) -> Result<Outcome, SutError>;
}

impl<T: Sut + ?Sized> Sut for Box<T> {
    fn alphabet(&self) -> &Alphabet {
        (**self).alphabet()
    }

    fn execute(&self, word: &Word) -> Result<Outcome, SutError> {
        (**self).execute(word)
    }
}

impl<T: Sut + ?Sized> Sut for std::sync::Arc<T> {
    fn alphabet(&self) -> &Alphabet {
        (**self).alphabet()
    }

    fn execute(&self, word: &Word) -> Result<Outcome, SutError> {
        (**self).execute(word)
    }
}
