//! From a capture automaton to a small consistent DFA: sample words, infer
//! with RPNI, refine on inconsistencies, fall back to the accepting view when
//! inference does worse.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::automata::{Alphabet, AutomatonError, Dfa, Label, StateId, ThreeDfa, Word};
use crate::relabel::{check_consistency, ExplanationKind, RelabelError};

#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("sample conflict: `{0}` is both positive and negative")]
    Conflict(String),
    #[error(transparent)]
    Relabel(#[from] RelabelError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Words reaching accepting states (positives) and rejecting states
/// (negatives).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SamplePair {
    pub positives: BTreeSet<Word>,
    pub negatives: BTreeSet<Word>,
}

impl SamplePair {
    fn add(&mut self, w: Word, label: Label) {
        match label {
            Label::Acc => {
                self.positives.insert(w);
            }
            Label::Rej => {
                self.negatives.insert(w);
            }
            Label::Dont => {}
        }
    }
}

/// Shortest words from each state to the nearest Acc or Rej state.
fn completions(t: &ThreeDfa) -> Vec<Option<Word>> {
    t.states()
        .map(|q| {
            let mut parent: Vec<Option<(StateId, crate::automata::Letter)>> = vec![None; t.len()];
            let mut seen = vec![false; t.len()];
            seen[q] = true;
            let mut queue = VecDeque::from([q]);
            while let Some(p) = queue.pop_front() {
                if t.label(p) != Label::Dont {
                    let mut w = Vec::new();
                    let mut cur = p;
                    while let Some((prev, a)) = parent[cur] {
                        w.push(a);
                        cur = prev;
                    }
                    w.reverse();
                    return Some(Word::from(w));
                }
                for a in t.alphabet().letters() {
                    let r = t.next(p, a);
                    if !seen[r] {
                        seen[r] = true;
                        parent[r] = Some((p, a));
                        queue.push_back(r);
                    }
                }
            }
            None
        })
        .collect()
}

/// Shortest access words of Acc and Rej states, a transition cover
/// completed to the nearest decided state, and every decided word up to
/// `extra_depth`.
pub fn sample_words(t: &ThreeDfa, extra_depth: usize) -> SamplePair {
    let mut sample = SamplePair::default();
    let access = t.access_words();
    let complete = completions(t);
    for (q, u) in &access {
        sample.add(u.clone(), t.label(*q));
    }
    for (q, u) in &access {
        for a in t.alphabet().letters() {
            let r = t.next(*q, a);
            if let Some(v) = &complete[r] {
                let w = u.with(a).concat(v);
                let label = t.classify_unchecked(&w);
                sample.add(w, label);
            }
        }
    }
    for w in Word::all_up_to(t.alphabet(), extra_depth) {
        let label = t.classify_unchecked(&w);
        sample.add(w, label);
    }
    sample
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mark {
    Accept,
    Reject,
    Unknown,
}

#[derive(Clone, Debug)]
struct Node {
    children: Vec<Option<usize>>,
    mark: Mark,
}

#[derive(Clone, Debug)]
struct Pta {
    nodes: Vec<Node>,
}

impl Pta {
    /// Prefix-tree acceptor with nodes numbered in breadth-first order.
    fn build(sample: &SamplePair, k: usize) -> Pta {
        let mut words: Vec<(&Word, Mark)> = sample
            .positives
            .iter()
            .map(|w| (w, Mark::Accept))
            .chain(sample.negatives.iter().map(|w| (w, Mark::Reject)))
            .collect();
        words.sort_by(|a, b| a.0.shortlex_cmp(b.0));
        // inserting in shortlex order numbers the trie breadth first
        let mut prefixes: BTreeSet<Word> = BTreeSet::new();
        for (w, _) in &words {
            for p in w.prefixes() {
                prefixes.insert(p);
            }
        }
        let mut prefixes: Vec<Word> = prefixes.into_iter().collect();
        prefixes.sort_by(|a, b| a.shortlex_cmp(b));
        let mut nodes = Vec::with_capacity(prefixes.len());
        let mut index = std::collections::HashMap::new();
        for p in &prefixes {
            index.insert(p.clone(), nodes.len());
            nodes.push(Node {
                children: vec![None; k],
                mark: Mark::Unknown,
            });
            if let Some((last, init)) = p.as_slice().split_last() {
                let parent = index[&Word::from(init.to_vec())];
                nodes[parent].children[last.index()] = Some(index[p]);
            }
        }
        for (w, m) in words {
            nodes[index[w]].mark = m;
        }
        if nodes.is_empty() {
            nodes.push(Node {
                children: vec![None; k],
                mark: Mark::Unknown,
            });
        }
        Pta { nodes }
    }

    /// Folds the tree rooted at `blue` into `red`; false on a mark conflict.
    fn fold(&mut self, red: usize, blue: usize) -> bool {
        let mut stack = vec![(red, blue)];
        while let Some((r, b)) = stack.pop() {
            let mb = self.nodes[b].mark;
            let mr = self.nodes[r].mark;
            match (mr, mb) {
                (Mark::Accept, Mark::Reject) | (Mark::Reject, Mark::Accept) => return false,
                (Mark::Unknown, m) => self.nodes[r].mark = m,
                _ => {}
            }
            for a in 0..self.nodes[b].children.len() {
                if let Some(cb) = self.nodes[b].children[a] {
                    match self.nodes[r].children[a] {
                        Some(cr) => stack.push((cr, cb)),
                        None => self.nodes[r].children[a] = Some(cb),
                    }
                }
            }
        }
        true
    }
}

/// Red-blue RPNI. The smallest blue node is merged into the first red node
/// that folds without conflict, or promoted to red. Missing transitions of
/// the result become self-loops, unknown states reject, and the result is
/// minimized.
pub fn rpni(sample: &SamplePair, alphabet: &Alphabet) -> Result<Dfa, ExtractError> {
    if let Some(w) = sample.positives.intersection(&sample.negatives).next() {
        return Err(ExtractError::Conflict(alphabet.render(w)));
    }
    let k = alphabet.len();
    let mut pta = Pta::build(sample, k);
    let mut red: Vec<usize> = vec![0];
    loop {
        // blue: children of red nodes that are not red, with their parent edge
        let mut blue: Option<(usize, usize, usize)> = None;
        for &r in &red {
            for a in 0..k {
                if let Some(c) = pta.nodes[r].children[a] {
                    if !red.contains(&c) && blue.is_none_or(|(b, _, _)| c < b) {
                        blue = Some((c, r, a));
                    }
                }
            }
        }
        let Some((b, parent, letter)) = blue else {
            break;
        };
        let mut merged = false;
        for &r in &red {
            let mut attempt = pta.clone();
            attempt.nodes[parent].children[letter] = Some(r);
            if attempt.fold(r, b) {
                pta = attempt;
                merged = true;
                break;
            }
        }
        if !merged {
            red.push(b);
            red.sort_unstable();
        }
    }
    let index = |q: usize| red.binary_search(&q).expect("all reachable nodes are red");
    let mut delta = Vec::with_capacity(red.len() * k);
    for (i, &r) in red.iter().enumerate() {
        for a in 0..k {
            delta.push(pta.nodes[r].children[a].map_or(i, index));
        }
    }
    let accepting = red
        .iter()
        .map(|&r| pta.nodes[r].mark == Mark::Accept)
        .collect();
    let dfa = Dfa::new(alphabet.clone(), 0, delta, accepting)?.minimize();
    debug_assert!(sample
        .positives
        .iter()
        .all(|w| dfa.accepts(w).unwrap_or(false)));
    debug_assert!(sample
        .negatives
        .iter()
        .all(|w| !dfa.accepts(w).unwrap_or(true)));
    Ok(dfa)
}

#[derive(Clone, Debug)]
pub struct ExtractOptions {
    pub extra_depth: usize,
    pub extension_closed: bool,
    pub max_iterations: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            extra_depth: 4,
            extension_closed: false,
            max_iterations: 1000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub kind: ExplanationKind,
    /// Canonical explanation automaton.
    pub dfa: Dfa,
    /// The relabeled capture the explanation is consistent with.
    pub spec: ThreeDfa,
    /// Size of the last RPNI result, before any fallback.
    pub rpni_size: Option<usize>,
    pub fallback: bool,
    pub refinements: usize,
    pub extension_closed: bool,
}

/// Explanation of the given kind for a capture automaton.
pub fn extract_explanation(
    capture: &ThreeDfa,
    kind: ExplanationKind,
    opts: &ExtractOptions,
) -> Result<Extraction, ExtractError> {
    let spec = kind.spec(capture)?;
    let acc_view = spec.view(&[Label::Acc]).minimize();
    let mut out = Extraction {
        kind,
        dfa: acc_view.clone(),
        spec: spec.clone(),
        rpni_size: None,
        fallback: false,
        refinements: 0,
        extension_closed: false,
    };
    if kind != ExplanationKind::B {
        let mut sample = sample_words(&spec, opts.extra_depth);
        let mut found = None;
        for i in 0..=opts.max_iterations {
            let candidate = rpni(&sample, spec.alphabet())?;
            out.rpni_size = Some(candidate.len());
            match check_consistency(&candidate, &spec)? {
                None => {
                    found = Some(candidate);
                    break;
                }
                Some(w) => {
                    out.refinements = i + 1;
                    let label = spec.classify(&w)?;
                    sample.add(w, label);
                }
            }
        }
        match found {
            Some(d) if d.len() <= acc_view.len() => out.dfa = d,
            _ => out.fallback = true,
        }
    }
    if opts.extension_closed && !acc_reaches_rej(&spec) {
        let closed = out.dfa.make_extension_closed();
        if check_consistency(&closed, &spec)?.is_none() {
            out.dfa = closed;
            out.extension_closed = true;
        }
    }
    out.dfa = out.dfa.canonicalize();
    debug_assert!(check_consistency(&out.dfa, &spec).ok() == Some(None));
    Ok(out)
}

fn acc_reaches_rej(t: &ThreeDfa) -> bool {
    let reach_rej = t.backward_reachable(t.states_labeled(Label::Rej));
    t.states_labeled(Label::Acc)
        .iter()
        .any(|q| reach_rej.contains(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn word(s: &str) -> Word {
        fixtures::binary().word_from_chars(s).unwrap()
    }

    fn set(ws: &[&str]) -> BTreeSet<Word> {
        ws.iter().map(|w| word(w)).collect()
    }

    #[test]
    fn shallow_sample_of_two_letter() {
        let c = fixtures::two_letter().capture().unwrap();
        let s = sample_words(&c, 0);
        assert!(s.positives.contains(&word("00")));
        assert!(s.positives.contains(&word("10")));
        assert!(s.negatives.contains(&word("1")));
        assert!(s.positives.is_disjoint(&s.negatives));
        let deep = sample_words(&c, 4);
        assert!(deep.positives.is_disjoint(&deep.negatives));
        for w in &deep.positives {
            assert_eq!(c.classify(w).unwrap(), Label::Acc);
        }
        for w in &deep.negatives {
            assert_eq!(c.classify(w).unwrap(), Label::Rej);
        }
    }

    #[test]
    fn no_accepting_states_no_positives() {
        let c = fixtures::two_letter().capture().unwrap();
        let no_acc = c.recolor(|_, l| if l == Label::Acc { Label::Dont } else { l });
        assert!(sample_words(&no_acc, 3).positives.is_empty());
    }

    #[test]
    fn rpni_examples() {
        let sigma = fixtures::binary();
        let sample = SamplePair {
            positives: set(&["00", "10"]),
            negatives: set(&["1", "11", "111"]),
        };
        let d = rpni(&sample, &sigma).unwrap();
        assert!(d.len() <= 3);
        for w in &sample.positives {
            assert!(d.accepts(w).unwrap());
        }
        for w in &sample.negatives {
            assert!(!d.accepts(w).unwrap());
        }
        let only_pos = SamplePair {
            positives: set(&["00", "10"]),
            negatives: BTreeSet::new(),
        };
        let d = rpni(&only_pos, &sigma).unwrap();
        assert_eq!(d.len(), 1);
        assert!(d.accepts(&word("")).unwrap());
        let clash = SamplePair {
            positives: set(&["1"]),
            negatives: set(&["1"]),
        };
        assert!(matches!(
            rpni(&clash, &sigma),
            Err(ExtractError::Conflict(_))
        ));
    }

    #[test]
    fn two_letter_sizes() {
        let c = fixtures::two_letter().capture().unwrap();
        let opts = ExtractOptions::default();
        let fe = extract_explanation(&c, ExplanationKind::Fe, &opts).unwrap();
        assert_eq!(fe.dfa.len(), 3);
        assert_eq!(
            fe.dfa.equivalent(&fixtures::fe3().minimize()).unwrap(),
            None
        );
        let edfe = extract_explanation(&c, ExplanationKind::Edfe, &opts).unwrap();
        assert_eq!(edfe.dfa.len(), 4);
        assert_eq!(
            edfe.dfa.equivalent(&fixtures::edfe4().minimize()).unwrap(),
            None
        );
        let b = extract_explanation(&c, ExplanationKind::B, &opts).unwrap();
        assert_eq!(b.dfa.len(), 6);
        assert_eq!(
            b.dfa
                .equivalent(&fixtures::two_letter_b().minimize())
                .unwrap(),
            None
        );
    }

    #[test]
    fn extension_closed_fe() {
        let c = fixtures::two_letter().capture().unwrap();
        let opts = ExtractOptions {
            extension_closed: true,
            ..Default::default()
        };
        let fe = extract_explanation(&c, ExplanationKind::Fe, &opts).unwrap();
        assert!(fe.extension_closed);
        assert!(fe.dfa.is_extension_closed());
        assert_eq!(fe.dfa.len(), 3);
        assert_eq!(check_consistency(&fe.dfa, &c).unwrap(), None);
    }

    #[test]
    fn sound_and_bounded_on_random_fixtures() {
        for seed in 0..30 {
            let c = fixtures::random_fixture(seed, 2, 5).capture().unwrap();
            let opts = ExtractOptions::default();
            let b = extract_explanation(&c, ExplanationKind::B, &opts).unwrap();
            for kind in ExplanationKind::ALL {
                let e = extract_explanation(&c, kind, &opts).unwrap();
                assert_eq!(
                    check_consistency(&e.dfa, &e.spec).unwrap(),
                    None,
                    "seed {seed} {kind}"
                );
                assert!(
                    e.dfa.len() <= b.dfa.len()
                        || kind == ExplanationKind::Edfe
                        || kind == ExplanationKind::Edefe
                );
                let again = extract_explanation(&c, kind, &opts).unwrap();
                assert_eq!(again.dfa, e.dfa);
            }
        }
    }
}
