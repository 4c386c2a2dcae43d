//! Relabelings of a capture automaton and exact consistency checking.
//!
//! [`efe_relabel`] turns passing states that are doomed to fail into
//! don't-care states; [`ed_relabel`] marks states that can only lead to
//! failures (never to a passing test) as accepting. Neither changes states,
//! transitions or the initial state.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{AutomatonError, Dfa, Label, StateId, ThreeDfa, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplanationKind {
    B,
    Fe,
    Efe,
    Edfe,
    Edefe,
}

#[derive(Debug, Error, PartialEq)]
pub enum RelabelError {
    #[error("accepting state {0} reaches a rejecting state: failures are not extension closed")]
    AccReachesRej(StateId),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

impl ExplanationKind {
    pub const ALL: [ExplanationKind; 5] = [
        ExplanationKind::B,
        ExplanationKind::Fe,
        ExplanationKind::Efe,
        ExplanationKind::Edfe,
        ExplanationKind::Edefe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExplanationKind::B => "b",
            ExplanationKind::Fe => "fe",
            ExplanationKind::Efe => "efe",
            ExplanationKind::Edfe => "edfe",
            ExplanationKind::Edefe => "edefe",
        }
    }

    /// The constraint specification an explanation of this kind must be
    /// consistent with, derived from the capture.
    ///
    /// For `B` every non-accepting state becomes rejecting, so the only
    /// consistent language is the accepting view itself.
    pub fn spec(self, capture: &ThreeDfa) -> Result<ThreeDfa, RelabelError> {
        Ok(match self {
            ExplanationKind::B => capture.recolor(|_, l| match l {
                Label::Acc => Label::Acc,
                _ => Label::Rej,
            }),
            ExplanationKind::Fe => capture.clone(),
            ExplanationKind::Efe => efe_relabel(capture),
            ExplanationKind::Edfe => ed_relabel(capture)?,
            ExplanationKind::Edefe => ed_relabel(&efe_relabel(capture))?,
        })
    }
}

impl fmt::Display for ExplanationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExplanationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExplanationKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!("unknown explanation kind `{s}` (expected b, fe, efe, edfe or edefe)")
            })
    }
}

/// Dont states whose every transition is a self-loop.
pub fn sink_dont(t: &ThreeDfa) -> BTreeSet<StateId> {
    t.states()
        .filter(|&q| t.label(q) == Label::Dont && t.successors(q).iter().all(|&p| p == q))
        .collect()
}

/// Rejecting states that may still pass: those reaching a rejecting state
/// whose every move leaves the executable space for good, or reaching a
/// cycle through a rejecting state.
pub fn may_pass(t: &ThreeDfa) -> BTreeSet<StateId> {
    let sinks = sink_dont(t);
    let seeds = t
        .states()
        .filter(|&q| t.label(q) == Label::Rej && t.successors(q).iter().all(|p| sinks.contains(p)));
    let mut result = t.backward_reachable(seeds);
    // Only components with an actual cycle: a trivial component trivially
    // "contains" its state and would keep every rejecting state.
    for comp in t.strongly_connected_components() {
        if t.is_cyclic_component(&comp) && comp.iter().any(|&q| t.label(q) == Label::Rej) {
            result.extend(comp);
        }
    }
    t.backward_reachable(result)
}

/// Eventual-failure relabeling: rejecting states that cannot pass anymore
/// become Dont.
pub fn efe_relabel(t: &ThreeDfa) -> ThreeDfa {
    let keep = may_pass(t);
    t.recolor(|q, l| match l {
        Label::Rej if !keep.contains(&q) => Label::Dont,
        l => l,
    })
}

/// Early-detection relabeling: every state that reaches an accepting state
/// but no rejecting one becomes accepting.
pub fn ed_relabel(t: &ThreeDfa) -> Result<ThreeDfa, RelabelError> {
    let reach_acc = t.backward_reachable(t.states_labeled(Label::Acc));
    let reach_rej = t.backward_reachable(t.states_labeled(Label::Rej));
    if let Some(&q) = t
        .states_labeled(Label::Acc)
        .iter()
        .find(|q| reach_rej.contains(q))
    {
        return Err(RelabelError::AccReachesRej(q));
    }
    Ok(t.recolor(|q, l| {
        if reach_acc.contains(&q) && !reach_rej.contains(&q) {
            Label::Acc
        } else {
            l
        }
    }))
}

/// Shortest word on which `candidate` violates the specification: an Acc
/// word it rejects or a Rej word it accepts. `None` iff consistent.
pub fn check_consistency(candidate: &Dfa, spec: &ThreeDfa) -> Result<Option<Word>, AutomatonError> {
    candidate.shortest_witness(spec, None, |acc, label| {
        matches!((label, acc), (Label::Acc, false) | (Label::Rej, true))
    })
}
