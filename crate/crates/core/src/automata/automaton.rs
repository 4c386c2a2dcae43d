use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::{Alphabet, AutomatonError, Letter, Word};

pub type StateId = usize;

/// Breadth-first search nodes over state pairs, each with a link to its
/// parent node and the letter leading here.
pub(crate) type PairTrail = Vec<((StateId, StateId), Option<(usize, Letter)>)>;

/// Per-state output of an automaton: `bool` for ordinary DFAs, [`Label`] for
/// three-valued ones.
pub trait StateColor: Copy + Eq + Hash + Ord + Debug + Send + Sync + 'static {}

impl<T: Copy + Eq + Hash + Ord + Debug + Send + Sync + 'static> StateColor for T {}

/// Classification of a word by a three-valued automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Acc,
    Rej,
    Dont,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Acc, Label::Rej, Label::Dont];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Acc => "Acc",
            Label::Rej => "Rej",
            Label::Dont => "Dont",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "Acc" => Some(Label::Acc),
            "Rej" => Some(Label::Rej),
            "Dont" => Some(Label::Dont),
            _ => None,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A complete deterministic automaton whose states carry a color.
///
/// The transition table is total: `delta[q * |Σ| + a]` is defined for every
/// state and letter. Values are immutable once built; every transformation
/// returns a new automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton<C> {
    alphabet: Alphabet,
    initial: StateId,
    delta: Vec<StateId>,
    colors: Vec<C>,
}

pub type Dfa = Automaton<bool>;
pub type ThreeDfa = Automaton<Label>;

impl<C: StateColor> Automaton<C> {
    /// Builds an automaton from a flat transition table. Fails if the table
    /// is not total or refers to missing states.
    pub fn new(
        alphabet: Alphabet,
        initial: StateId,
        delta: Vec<StateId>,
        colors: Vec<C>,
    ) -> Result<Self, AutomatonError> {
        let n = colors.len();
        let k = alphabet.len();
        if k == 0 {
            return Err(AutomatonError::EmptyAlphabet);
        }
        if n == 0 || initial >= n {
            return Err(AutomatonError::Malformed(
                "initial state out of range".into(),
            ));
        }
        if delta.len() != n * k {
            return Err(AutomatonError::Malformed(format!(
                "transition table has {} entries, expected {}",
                delta.len(),
                n * k
            )));
        }
        if delta.iter().any(|&t| t >= n) {
            return Err(AutomatonError::Malformed(
                "transition target out of range".into(),
            ));
        }
        Ok(Automaton {
            alphabet,
            initial,
            delta,
            colors,
        })
    }

    pub fn from_fn(
        alphabet: Alphabet,
        states: usize,
        initial: StateId,
        mut next: impl FnMut(StateId, Letter) -> StateId,
        mut color: impl FnMut(StateId) -> C,
    ) -> Result<Self, AutomatonError> {
        let mut delta = Vec::with_capacity(states * alphabet.len());
        for q in 0..states {
            for a in alphabet.letters() {
                delta.push(next(q, a));
            }
        }
        let colors = (0..states).map(&mut color).collect();
        Self::new(alphabet, initial, delta, colors)
    }

    /// One-state automaton with a self-loop on every letter.
    pub fn constant(alphabet: Alphabet, color: C) -> Result<Self, AutomatonError> {
        let k = alphabet.len();
        Self::new(alphabet, 0, vec![0; k], vec![color])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.len()
    }

    pub fn color(&self, q: StateId) -> C {
        self.colors[q]
    }

    pub fn colors(&self) -> &[C] {
        &self.colors
    }

    pub fn next(&self, q: StateId, a: Letter) -> StateId {
        self.delta[q * self.alphabet.len() + a.index()]
    }

    pub fn successors(&self, q: StateId) -> &[StateId] {
        let k = self.alphabet.len();
        &self.delta[q * k..(q + 1) * k]
    }

    /// State reached from `from` by reading `word`. Letters are assumed to
    /// belong to the alphabet; see [`Automaton::run`] for the checked form.
    pub fn run_from(&self, from: StateId, word: &Word) -> StateId {
        word.iter().fold(from, |q, &a| self.next(q, a))
    }

    pub fn run(&self, word: &Word) -> Result<StateId, AutomatonError> {
        self.alphabet.check_word(word)?;
        Ok(self.run_from(self.initial, word))
    }

    /// Color of the state reached by `word`.
    pub fn classify(&self, word: &Word) -> Result<C, AutomatonError> {
        self.run(word).map(|q| self.color(q))
    }

    pub(crate) fn classify_unchecked(&self, word: &Word) -> C {
        self.color(self.run_from(self.initial, word))
    }

    pub fn recolor<D: StateColor>(&self, mut f: impl FnMut(StateId, C) -> D) -> Automaton<D> {
        Automaton {
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            delta: self.delta.clone(),
            colors: self
                .colors
                .iter()
                .enumerate()
                .map(|(q, &c)| f(q, c))
                .collect(),
        }
    }

    /// Same colors, with `f` deciding each transition target.
    pub fn redirect(&self, mut f: impl FnMut(StateId, Letter, StateId) -> StateId) -> Self {
        let k = self.alphabet.len();
        let delta = self
            .delta
            .iter()
            .enumerate()
            .map(|(i, &t)| f(i / k, Letter::new(i % k), t))
            .collect();
        Automaton {
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            delta,
            colors: self.colors.clone(),
        }
    }

    /// Reachable states in breadth-first discovery order (letters in alphabet
    /// order), each paired with its shortlex-least access word.
    pub fn access_words(&self) -> Vec<(StateId, Word)> {
        let mut seen = vec![false; self.len()];
        let mut out = vec![(self.initial, Word::empty())];
        seen[self.initial] = true;
        let mut head = 0;
        while head < out.len() {
            let (q, w) = out[head].clone();
            head += 1;
            for a in self.alphabet.letters() {
                let t = self.next(q, a);
                if !seen[t] {
                    seen[t] = true;
                    out.push((t, w.with(a)));
                }
            }
        }
        out
    }

    /// Renumbers states in breadth-first discovery order from the initial
    /// state and drops unreachable ones. Isomorphic automata have identical
    /// canonical forms.
    pub fn canonicalize(&self) -> Self {
        let mut index = vec![usize::MAX; self.len()];
        let mut order = vec![self.initial];
        index[self.initial] = 0;
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for &t in self.successors(q) {
                if index[t] == usize::MAX {
                    index[t] = order.len();
                    order.push(t);
                }
            }
        }
        let k = self.alphabet.len();
        let mut delta = Vec::with_capacity(order.len() * k);
        for &q in &order {
            delta.extend(self.successors(q).iter().map(|&t| index[t]));
        }
        Automaton {
            alphabet: self.alphabet.clone(),
            initial: 0,
            delta,
            colors: order.iter().map(|&q| self.colors[q]).collect(),
        }
    }

    fn check_alphabet<D>(&self, other: &Automaton<D>) -> Result<(), AutomatonError> {
        if self.alphabet != other.alphabet {
            return Err(AutomatonError::AlphabetMismatch {
                left: self.alphabet.names().to_vec(),
                right: other.alphabet.names().to_vec(),
            });
        }
        Ok(())
    }

    /// Reachable product of two automata over the same alphabet; each
    /// product state is colored by `combine` of its component colors.
    pub fn product<D: StateColor, E: StateColor>(
        &self,
        other: &Automaton<D>,
        mut combine: impl FnMut(C, D) -> E,
    ) -> Result<Automaton<E>, AutomatonError> {
        self.check_alphabet(other)?;
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut pairs = vec![(self.initial, other.initial)];
        index.insert(pairs[0], 0);
        let mut delta = Vec::new();
        let mut head = 0;
        while head < pairs.len() {
            let (p, q) = pairs[head];
            head += 1;
            for a in self.alphabet.letters() {
                let pair = (self.next(p, a), other.next(q, a));
                let id = *index.entry(pair).or_insert_with(|| {
                    pairs.push(pair);
                    pairs.len() - 1
                });
                delta.push(id);
            }
        }
        let colors = pairs
            .iter()
            .map(|&(p, q)| combine(self.color(p), other.color(q)))
            .collect();
        Ok(Automaton {
            alphabet: self.alphabet.clone(),
            initial: 0,
            delta,
            colors,
        })
    }

    /// Shortlex-least word `w` such that `pred(self(w), other(w))` holds,
    /// found by breadth-first search over the product. `limit` bounds the
    /// number of product states explored.
    pub fn shortest_witness<D: StateColor>(
        &self,
        other: &Automaton<D>,
        limit: Option<usize>,
        mut pred: impl FnMut(C, D) -> bool,
    ) -> Result<Option<Word>, AutomatonError> {
        self.check_alphabet(other)?;
        let start = (self.initial, other.initial);
        // parent links: (previous pair index, letter)
        let mut nodes: PairTrail = vec![(start, None)];
        let mut seen: HashSet<(StateId, StateId)> = HashSet::from([start]);
        let mut head = 0;
        while head < nodes.len() {
            let ((p, q), _) = nodes[head];
            if pred(self.color(p), other.color(q)) {
                let mut word = Vec::new();
                let mut cur = head;
                while let Some((prev, a)) = nodes[cur].1 {
                    word.push(a);
                    cur = prev;
                }
                word.reverse();
                return Ok(Some(Word::from(word)));
            }
            for a in self.alphabet.letters() {
                let pair = (self.next(p, a), other.next(q, a));
                if seen.insert(pair) {
                    if let Some(limit) = limit {
                        if nodes.len() >= limit {
                            return Err(AutomatonError::ProductLimit(limit));
                        }
                    }
                    nodes.push((pair, Some((head, a))));
                }
            }
            head += 1;
        }
        Ok(None)
    }

    /// Shortlex-least word on which the two automata disagree; `None` iff
    /// they classify every word identically.
    pub fn equivalent(&self, other: &Self) -> Result<Option<Word>, AutomatonError> {
        self.shortest_witness(other, None, |a, b| a != b)
    }

    /// Shortlex-least word whose state color satisfies `pred`.
    pub fn find_word(&self, mut pred: impl FnMut(C) -> bool) -> Option<Word> {
        self.access_words()
            .into_iter()
            .find(|(q, _)| pred(self.color(*q)))
            .map(|(_, w)| w)
    }

    /// Transition graph with parallel edges collapsed, for graph algorithms.
    pub fn adjacency(&self) -> Vec<Vec<StateId>> {
        self.states()
            .map(|q| {
                let mut succ = self.successors(q).to_vec();
                succ.sort_unstable();
                succ.dedup();
                succ
            })
            .collect()
    }
}

impl Dfa {
    pub fn is_accepting(&self, q: StateId) -> bool {
        self.color(q)
    }

    /// Whether `word` is in the language; errors on foreign letters.
    pub fn accepts(&self, word: &Word) -> Result<bool, AutomatonError> {
        self.classify(word)
    }

    pub fn universal(alphabet: Alphabet) -> Result<Dfa, AutomatonError> {
        Dfa::constant(alphabet, true)
    }

    pub fn empty_language(alphabet: Alphabet) -> Result<Dfa, AutomatonError> {
        Dfa::constant(alphabet, false)
    }

    pub fn complement(&self) -> Dfa {
        self.recolor(|_, acc| !acc)
    }

    /// Product automaton accepting `{w : combine(w ∈ L(self), w ∈ L(other))}`.
    pub fn combine(
        &self,
        other: &Dfa,
        combine: impl FnMut(bool, bool) -> bool,
    ) -> Result<Dfa, AutomatonError> {
        self.product(other, combine)
    }

    pub fn intersect(&self, other: &Dfa) -> Result<Dfa, AutomatonError> {
        self.combine(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Dfa) -> Result<Dfa, AutomatonError> {
        self.combine(other, |a, b| a || b)
    }

    pub fn difference(&self, other: &Dfa) -> Result<Dfa, AutomatonError> {
        self.combine(other, |a, b| a && !b)
    }

    /// Shortest word of `L(self) ∖ L(other)`, if any.
    pub fn subset_witness(&self, other: &Dfa) -> Result<Option<Word>, AutomatonError> {
        self.shortest_witness(other, None, |a, b| a && !b)
    }

    pub fn is_empty_language(&self) -> bool {
        self.find_word(|acc| acc).is_none()
    }

    /// Redirects every transition leaving an accepting state back to that
    /// state. No transition leaves the accepting region afterwards and the
    /// state count is unchanged.
    pub fn make_extension_closed(&self) -> Dfa {
        self.redirect(|q, _, t| if self.is_accepting(q) { q } else { t })
    }

    /// True iff no transition leads from an accepting state to a rejecting
    /// one, i.e. the language contains every extension of its members.
    pub fn is_extension_closed(&self) -> bool {
        self.states()
            .filter(|&q| self.is_accepting(q))
            .all(|q| self.successors(q).iter().all(|&t| self.is_accepting(t)))
    }
}

impl ThreeDfa {
    pub fn label(&self, q: StateId) -> Label {
        self.color(q)
    }

    /// The DFA `A^C` accepting exactly the words labeled by one of `labels`.
    pub fn view(&self, labels: &[Label]) -> Dfa {
        self.recolor(|_, l| labels.contains(&l))
    }

    pub fn states_labeled(&self, label: Label) -> Vec<StateId> {
        self.states().filter(|&q| self.label(q) == label).collect()
    }

    /// Three-valued automaton from the pair of languages `(accept, reject)`:
    /// words in `accept` are Acc, words in `reject` Rej, others Dont. The
    /// languages must be disjoint.
    pub fn from_constraint(accept: &Dfa, reject: &Dfa) -> Result<ThreeDfa, AutomatonError> {
        if let Some(w) = accept.shortest_witness(reject, None, |a, r| a && r)? {
            return Err(AutomatonError::Malformed(format!(
                "constraint languages overlap on {}",
                accept.alphabet().render(&w)
            )));
        }
        accept.product(reject, |a, r| match (a, r) {
            (true, _) => Label::Acc,
            (false, true) => Label::Rej,
            (false, false) => Label::Dont,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::format::parse_dfa;
    use crate::fixtures::{binary, edfe4, fe3, two_letter_b, two_letter_s};

    fn w(s: &str) -> Word {
        binary().word_from_chars(s).unwrap()
    }

    #[test]
    fn membership_in_example_languages() {
        let (s, b) = (two_letter_s(), two_letter_b());
        assert!(s.accepts(&w("00")).unwrap());
        assert!(s.accepts(&w("1")).unwrap());
        assert!(!s.accepts(&w("01")).unwrap());
        assert!(b.accepts(&w("10")).unwrap());
        assert!(b.accepts(&w("1110")).unwrap());
        assert!(!b.accepts(&w("1101")).unwrap());
    }

    #[test]
    fn difference_keeps_passing_tests() {
        let passing = two_letter_s().difference(&two_letter_b()).unwrap();
        assert!(passing.accepts(&w("1")).unwrap());
        assert!(passing.accepts(&w("111")).unwrap());
        assert!(!passing.accepts(&w("00")).unwrap());
        assert!(!passing.accepts(&w("01")).unwrap());
    }

    #[test]
    fn equivalence_witness_is_shortlex_least() {
        assert_eq!(fe3().equivalent(&edfe4()).unwrap(), Some(w("0")));
        assert_eq!(fe3().equivalent(&fe3().canonicalize()).unwrap(), None);
    }

    #[test]
    fn foreign_alphabets_are_rejected() {
        let other = Dfa::universal(Alphabet::new(["a"]).unwrap()).unwrap();
        assert!(matches!(
            fe3().equivalent(&other),
            Err(AutomatonError::AlphabetMismatch { .. })
        ));
        assert!(fe3().accepts(&Word::from(vec![Letter::new(5)])).is_err());
    }

    #[test]
    fn extension_closure() {
        assert!(fe3().is_extension_closed());
        assert_eq!(fe3().make_extension_closed(), fe3());

        let just_zero = parse_dfa(
            "alphabet: 0 1
             initial: e
             accepting: z
             e 0 -> z
             e 1 -> d
             z 0 -> d
             z 1 -> d
             d 0 -> d
             d 1 -> d",
        )
        .unwrap();
        assert!(!just_zero.is_extension_closed());
        let closed = just_zero.make_extension_closed();
        assert!(closed.is_extension_closed());
        assert_eq!(closed.len(), just_zero.len());
        for u in Word::all_up_to(&binary(), 5) {
            let starts_with_zero = u.iter().next() == Some(&Letter::new(0));
            assert_eq!(closed.accepts(&u).unwrap(), starts_with_zero);
        }
    }

    #[test]
    fn canonical_form_is_idempotent() {
        let c = edfe4().canonicalize();
        assert_eq!(c.canonicalize(), c);
        assert_eq!(c.initial(), 0);
    }

    #[test]
    fn malformed_tables() {
        let sigma = binary();
        assert!(Dfa::new(sigma.clone(), 0, vec![0], vec![true]).is_err());
        assert!(Dfa::new(sigma.clone(), 0, vec![0, 1], vec![true]).is_err());
        assert!(Dfa::new(sigma, 1, vec![0, 0], vec![true]).is_err());
    }

    #[test]
    fn constraint_languages_must_be_disjoint() {
        let t = ThreeDfa::from_constraint(
            &two_letter_b(),
            &two_letter_s().difference(&two_letter_b()).unwrap(),
        )
        .unwrap();
        assert_eq!(t.classify(&w("00")).unwrap(), Label::Acc);
        assert_eq!(t.classify(&w("1")).unwrap(), Label::Rej);
        assert_eq!(t.classify(&w("01")).unwrap(), Label::Dont);
        assert!(ThreeDfa::from_constraint(&two_letter_s(), &two_letter_b()).is_err());
    }
}
