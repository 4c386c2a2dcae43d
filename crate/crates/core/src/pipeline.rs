//! Learn, relabel and extract in one call.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::automata::{Dfa, Label, ThreeDfa, Word};
use crate::extract::{extract_explanation, ExtractError, ExtractOptions};
use crate::lstar::{
    learn, EquivalenceConfig, LearnError, Teacher, TranscriptEvent, DEFAULT_MAX_ROUNDS,
};
use crate::oracle::{exhaustive_min_consistent, OracleError};
use crate::relabel::ExplanationKind;
use crate::sut::{CachedSut, Outcome, Sut, SutError};
use crate::test_model::TestModel;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Coarse classification used for exit codes and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Budget,
    Transport,
    Other,
}

impl PipelineError {
    pub fn class(&self) -> ErrorClass {
        match self {
            PipelineError::Learn(LearnError::Budget(_))
            | PipelineError::Oracle(OracleError::Budget { .. }) => ErrorClass::Budget,
            PipelineError::Learn(LearnError::Sut(SutError::Transport(_))) => ErrorClass::Transport,
            PipelineError::Learn(LearnError::Automaton(_)) => ErrorClass::Input,
            _ => ErrorClass::Other,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub equivalence: EquivalenceConfig,
    pub max_rounds: usize,
    pub extract: ExtractOptions,
    /// When set, also search for a provably minimal explanation with at
    /// most this many states (exhaustive, toy scale only).
    pub minimal_states: Option<usize>,
    pub minimal_budget: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            equivalence: EquivalenceConfig::default(),
            max_rounds: DEFAULT_MAX_ROUNDS,
            extract: ExtractOptions::default(),
            minimal_states: None,
            minimal_budget: crate::oracle::DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExplanationSummary {
    pub size: usize,
    pub rpni_size: Option<usize>,
    pub fallback: bool,
    pub refinements: usize,
    pub extension_closed: bool,
    /// Size of a smallest consistent DFA when the exhaustive search ran and
    /// found one within its bound.
    pub minimal_size: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Explanation {
    pub kind: ExplanationKind,
    pub dfa: Dfa,
    pub spec: ThreeDfa,
    pub summary: ExplanationSummary,
}

/// Everything a run produces. The summary excludes wall time so that it is
/// reproducible.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineSummary {
    pub seed: u64,
    pub alphabet_size: usize,
    pub test_model_size: usize,
    pub capture_size: usize,
    pub b_size: usize,
    pub rounds: usize,
    pub membership_queries: usize,
    pub executions: usize,
    pub explanations: BTreeMap<ExplanationKind, ExplanationSummary>,
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub capture: ThreeDfa,
    pub explanations: Vec<Explanation>,
    pub transcript: Vec<TranscriptEvent>,
    pub repo: Vec<(Word, Outcome)>,
    pub summary: PipelineSummary,
    pub wall_time: Duration,
}

impl PipelineReport {
    pub fn explanation(&self, kind: ExplanationKind) -> Option<&Explanation> {
        self.explanations.iter().find(|e| e.kind == kind)
    }

    pub fn transcript_json_lines(&self) -> String {
        self.transcript
            .iter()
            .map(|e| serde_json::to_string(e).expect("transcript serializes") + "\n")
            .collect()
    }
}

/// Explanations of the requested kinds for a known capture automaton.
pub fn explain_capture(
    capture: &ThreeDfa,
    kinds: &[ExplanationKind],
    config: &PipelineConfig,
) -> Result<Vec<Explanation>, PipelineError> {
    kinds
        .iter()
        .map(|&kind| {
            let e = extract_explanation(capture, kind, &config.extract)?;
            let minimal_size = match config.minimal_states {
                Some(max) => {
                    exhaustive_min_consistent(&e.spec, max, config.minimal_budget)?.map(|d| d.len())
                }
                None => None,
            };
            Ok(Explanation {
                kind,
                summary: ExplanationSummary {
                    size: e.dfa.len(),
                    rpni_size: e.rpni_size,
                    fallback: e.fallback,
                    refinements: e.refinements,
                    extension_closed: e.extension_closed,
                    minimal_size,
                },
                dfa: e.dfa,
                spec: e.spec,
            })
        })
        .collect()
}

/// Learns the capture of `sut` within `test_model`, then extracts each
/// requested explanation.
pub fn run_pipeline<S: Sut>(
    sut: CachedSut<S>,
    test_model: TestModel,
    kinds: &[ExplanationKind],
    config: &PipelineConfig,
) -> Result<PipelineReport, PipelineError> {
    let start = Instant::now();
    let alphabet_size = test_model.alphabet().len();
    let test_model_size = test_model.size();
    let teacher = Teacher::new(test_model, sut, config.equivalence.clone())?;
    let learned = learn(&teacher, config.max_rounds)?;
    let explanations = explain_capture(&learned.capture, kinds, config)?;
    let b_size = learned.capture.view(&[Label::Acc]).minimize().len();
    let summary = PipelineSummary {
        seed: config.equivalence.seed,
        alphabet_size,
        test_model_size,
        capture_size: learned.capture.len(),
        b_size,
        rounds: learned.rounds,
        membership_queries: learned.membership_queries,
        executions: learned.executions,
        explanations: explanations
            .iter()
            .map(|e| (e.kind, e.summary.clone()))
            .collect(),
    };
    Ok(PipelineReport {
        capture: learned.capture,
        explanations,
        transcript: learned.transcript,
        repo: teacher.sut().records(),
        summary,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sut::SimulatedSut;
    use crate::test_model::sigma_star;

    #[test]
    fn two_letter_end_to_end() {
        let ex = fixtures::two_letter();
        let sut = CachedSut::in_memory(SimulatedSut::new(ex.s.clone(), ex.b.clone()).unwrap());
        let config = PipelineConfig {
            minimal_states: Some(4),
            ..Default::default()
        };
        let kinds = [
            ExplanationKind::Fe,
            ExplanationKind::Edfe,
            ExplanationKind::B,
        ];
        let r = run_pipeline(sut, sigma_star(ex.alphabet()).unwrap(), &kinds, &config).unwrap();
        assert_eq!(r.summary.capture_size, 6);
        assert_eq!(r.summary.b_size, 6);
        let fe = &r.summary.explanations[&ExplanationKind::Fe];
        assert_eq!((fe.size, fe.minimal_size), (3, Some(3)));
        let edfe = &r.summary.explanations[&ExplanationKind::Edfe];
        assert_eq!((edfe.size, edfe.minimal_size), (4, Some(4)));
        assert_eq!(r.summary.executions, r.repo.len());
    }
}
