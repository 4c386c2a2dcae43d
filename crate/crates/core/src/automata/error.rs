use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("alphabet must not be empty")]
    EmptyAlphabet,
    #[error("duplicate letter `{0}`")]
    DuplicateLetter(String),
    #[error("invalid letter name `{0}` (letters are non-empty and contain no whitespace)")]
    InvalidLetterName(String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("letter index {0} is outside the alphabet")]
    ForeignLetter(usize),
    #[error("alphabet mismatch: {left:?} vs {right:?}")]
    AlphabetMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },
    #[error("component alphabets overlap on `{0}`")]
    OverlappingAlphabets(String),
    #[error("product exploration exceeded {0} states")]
    ProductLimit(usize),
    #[error("malformed automaton: {0}")]
    Malformed(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing transition for state `{state}` on letter `{letter}`")]
    MissingTransition { state: String, letter: String },
}
