//! Brute-force ground truth, written independently of the learner and of the
//! graph algorithms it checks.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::automata::{AutomatonError, Dfa, Label, ThreeDfa, Word};
use crate::fixtures::Fixture;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle budget of {limit} {what} exceeded")]
    Budget { what: &'static str, limit: usize },
    #[error("`{0}` is not a prefix of any executable test")]
    NotPrefix(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Default cap on the number of enumerated words.
pub const DEFAULT_WORD_BUDGET: usize = 1 << 20;

/// Default cap on search nodes for [`exhaustive_min_consistent`].
pub const DEFAULT_NODE_BUDGET: usize = 50_000_000;

/// True label of every word up to `max_len`, by direct membership in T, S
/// and B.
pub fn enumerate_classify(
    fixture: &Fixture,
    max_len: usize,
    budget: usize,
) -> Result<BTreeMap<Word, Label>, OracleError> {
    let k = fixture.alphabet().len();
    let mut total: usize = 0;
    let mut layer: usize = 1;
    for _ in 0..=max_len {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(k);
    }
    if total > budget {
        return Err(OracleError::Budget {
            what: "words",
            limit: budget,
        });
    }
    Word::all_up_to(fixture.alphabet(), max_len)
        .into_iter()
        .map(|w| Ok((w.clone(), fixture.label(&w)?)))
        .collect()
}

/// Whether the executable prefix `w` may still pass: along some
/// continuation it either reaches a passing test with no longer executable
/// extension, or it passes infinitely often.
pub fn brute_may_pass(s: &Dfa, b: &Dfa, w: &Word) -> Result<bool, OracleError> {
    let k = s.alphabet().len();
    let start = (s.run(w)?, b.run(w)?);
    let step = |(p, q): (usize, usize), a: usize| {
        let a = crate::automata::Letter::new(a);
        (s.next(p, a), b.next(q, a))
    };
    // every node reachable from `from` in zero or more steps
    let reach = |from: (usize, usize)| -> BTreeSet<(usize, usize)> {
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            for a in 0..k {
                let y = step(x, a);
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    };
    let in_s = |x: (usize, usize)| s.is_accepting(x.0);
    let passing = |x: (usize, usize)| s.is_accepting(x.0) && !b.is_accepting(x.1);

    let reachable = reach(start);
    if !reachable.iter().any(|&x| in_s(x)) {
        return Err(OracleError::NotPrefix(s.alphabet().render(w)));
    }
    for &x in reachable.iter().filter(|&&x| passing(x)) {
        let mut strict = BTreeSet::new();
        for a in 0..k {
            strict.extend(reach(step(x, a)));
        }
        let maximal = !strict.iter().any(|&y| in_s(y));
        let cyclic = strict.contains(&x);
        if maximal || cyclic {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone)]
struct Partial {
    created: usize,
    delta: Vec<Option<usize>>,
    // spec states paired with each candidate state, one bitset per state
    pairs: Vec<u64>,
    // Some(true): must accept, Some(false): must reject
    need: Vec<Option<bool>>,
}

struct Search<'a> {
    spec: &'a ThreeDfa,
    k: usize,
    words: usize,
    n: usize,
    nodes: usize,
    budget: usize,
}

impl Search<'_> {
    fn paired<'p>(&self, part: &'p Partial, c: usize) -> impl Iterator<Item = usize> + 'p {
        let words = self.words;
        part.pairs[c * words..(c + 1) * words]
            .iter()
            .enumerate()
            .flat_map(|(i, &w)| {
                (0..64)
                    .filter(move |b| w >> b & 1 == 1)
                    .map(move |b| i * 64 + b)
            })
    }

    /// Adds product pairs and everything they reach through assigned
    /// transitions; false on an accept/reject conflict.
    fn propagate(&self, part: &mut Partial, mut work: Vec<(usize, usize)>) -> bool {
        while let Some((c, p)) = work.pop() {
            let (i, bit) = (c * self.words + p / 64, 1u64 << (p % 64));
            if part.pairs[i] & bit != 0 {
                continue;
            }
            part.pairs[i] |= bit;
            let required = match self.spec.label(p) {
                Label::Acc => Some(true),
                Label::Rej => Some(false),
                Label::Dont => None,
            };
            if let Some(r) = required {
                match part.need[c] {
                    Some(existing) if existing != r => return false,
                    _ => part.need[c] = Some(r),
                }
            }
            for a in 0..self.k {
                if let Some(t) = part.delta[c * self.k + a] {
                    work.push((t, self.spec.next(p, crate::automata::Letter::new(a))));
                }
            }
        }
        true
    }

    fn run(&mut self, part: Partial, slot: usize) -> Result<Option<Partial>, OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OracleError::Budget {
                what: "search nodes",
                limit: self.budget,
            });
        }
        if slot == self.n * self.k {
            return Ok(Some(part));
        }
        let (c, a) = (slot / self.k, slot % self.k);
        if c >= part.created {
            // state c is unreachable; smaller sizes were already tried
            return Ok(None);
        }
        let max_target = part.created.min(self.n - 1);
        for t in 0..=max_target {
            let mut next = part.clone();
            if t == next.created {
                next.created += 1;
            }
            next.delta[slot] = Some(t);
            let letter = crate::automata::Letter::new(a);
            let work: Vec<_> = self
                .paired(&part, c)
                .map(|p| (t, self.spec.next(p, letter)))
                .collect();
            if !self.propagate(&mut next, work) {
                continue;
            }
            if let Some(found) = self.run(next, slot + 1)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }
}

/// Smallest complete DFA consistent with `spec` (accepts every Acc word,
/// rejects every Rej word) with at most `max_states` states, found by
/// exhaustive search over transition tables in breadth-first canonical
/// numbering. Sizes are tried in increasing order.
pub fn exhaustive_min_consistent(
    spec: &ThreeDfa,
    max_states: usize,
    budget: usize,
) -> Result<Option<Dfa>, OracleError> {
    let k = spec.alphabet().len();
    let words = spec.len().div_ceil(64);
    let mut nodes = 0;
    for n in 1..=max_states {
        let mut search = Search {
            spec,
            k,
            words,
            n,
            nodes,
            budget,
        };
        let mut start = Partial {
            created: 1,
            delta: vec![None; n * k],
            pairs: vec![0; n * words],
            need: vec![None; n],
        };
        if !search.propagate(&mut start, vec![(0, spec.initial())]) {
            return Ok(None);
        }
        let found = search.run(start, 0)?;
        nodes = search.nodes;
        if let Some(part) = found {
            let delta = part
                .delta
                .into_iter()
                .map(|t| t.expect("complete"))
                .collect();
            let accepting = part.need.into_iter().map(|r| r == Some(true)).collect();
            let dfa = Dfa::new(spec.alphabet().clone(), 0, delta, accepting)?;
            return Ok(Some(dfa.canonicalize()));
        }
    }
    Ok(None)
}
