//! Active learning of a three-valued capture automaton.

mod table;
mod teacher;
mod wmethod;

use serde::Serialize;
use thiserror::Error;

use crate::automata::{AutomatonError, Label, ThreeDfa};
use crate::sut::{Sut, SutError};

pub use table::ObservationTable;
pub use teacher::{CexSource, EquivalenceConfig, Teacher, ViewCheck};
pub use wmethod::{characterization_set, random_w_method};

pub const DEFAULT_MAX_ROUNDS: usize = 500;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error(transparent)]
    Sut(#[from] SutError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("learning did not converge within {0} rounds")]
    Budget(usize),
    #[error("the exact classification disagrees with the system on `{0}`")]
    InconsistentTruth(String),
}

/// One line of the learning transcript.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TranscriptEvent {
    Hypothesis {
        round: usize,
        states: usize,
        prefixes: usize,
        suffixes: usize,
        membership_queries: usize,
        executions: usize,
    },
    Counterexample {
        round: usize,
        word: String,
        source: CexSource,
        hypothesis_label: Label,
        teacher_label: Label,
    },
    Finished {
        rounds: usize,
        states: usize,
        membership_queries: usize,
        executions: usize,
    },
}

#[derive(Clone, Debug)]
pub struct LearnResult {
    /// Minimal, canonical capture automaton.
    pub capture: ThreeDfa,
    pub rounds: usize,
    pub membership_queries: usize,
    pub executions: usize,
    pub transcript: Vec<TranscriptEvent>,
}

impl LearnResult {
    /// The transcript as JSON lines.
    pub fn transcript_json_lines(&self) -> String {
        self.transcript
            .iter()
            .map(|e| serde_json::to_string(e).expect("transcript serializes") + "\n")
            .collect()
    }
}

/// L* over three labels: fills, closes and makes the table consistent,
/// proposes its hypothesis and adds every prefix of each counterexample as
/// a row, until the teacher has no counterexample.
pub fn learn<S: Sut>(teacher: &Teacher<S>, max_rounds: usize) -> Result<LearnResult, LearnError> {
    let alphabet = teacher.sut().alphabet().clone();
    let mut table = ObservationTable::new(alphabet.clone());
    let mut transcript = Vec::new();
    for round in 1..=max_rounds {
        loop {
            table.fill(|w| teacher.membership_query(w))?;
            if let Some(row) = table.find_unclosed() {
                table.add_prefix(row);
                continue;
            }
            if let Some(suffix) = table.find_inconsistency() {
                table.add_suffix(suffix);
                continue;
            }
            break;
        }
        let hyp = table.hypothesis();
        transcript.push(TranscriptEvent::Hypothesis {
            round,
            states: hyp.len(),
            prefixes: table.prefixes().count(),
            suffixes: table.suffixes().len(),
            membership_queries: teacher.membership_queries(),
            executions: teacher.sut().executions(),
        });
        match teacher.equivalence_query(&hyp, round)? {
            Some((cex, source)) => {
                transcript.push(TranscriptEvent::Counterexample {
                    round,
                    word: alphabet.render(&cex),
                    source,
                    hypothesis_label: hyp.classify(&cex)?,
                    teacher_label: teacher.membership_query(&cex)?,
                });
                table.add_counterexample(&cex);
            }
            None => {
                let capture = hyp.minimize();
                transcript.push(TranscriptEvent::Finished {
                    rounds: round,
                    states: capture.len(),
                    membership_queries: teacher.membership_queries(),
                    executions: teacher.sut().executions(),
                });
                return Ok(LearnResult {
                    capture,
                    rounds: round,
                    membership_queries: teacher.membership_queries(),
                    executions: teacher.sut().executions(),
                    transcript,
                });
            }
        }
    }
    Err(LearnError::Budget(max_rounds))
}
