use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::automata::{Automaton, Dfa, Label, Letter, PairTrail, StateColor, StateId, Word};

/// Shortest distinguishing suffix for every pair of distinguishable states:
/// a characterization set of `a`.
pub fn characterization_set<C: StateColor>(a: &Automaton<C>) -> Vec<Word> {
    let n = a.len();
    let mut out = BTreeSet::new();
    for p in 0..n {
        for q in p + 1..n {
            if let Some(w) = distinguishing_suffix(a, p, q) {
                out.insert(w);
            }
        }
    }
    let mut out: Vec<Word> = out.into_iter().collect();
    out.sort_by(|x, y| x.shortlex_cmp(y));
    out
}

fn distinguishing_suffix<C: StateColor>(a: &Automaton<C>, p: StateId, q: StateId) -> Option<Word> {
    let mut parents: PairTrail = vec![((p, q), None)];
    let mut seen = HashSet::from([(p, q)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (x, y) = parents[i].0;
        if a.color(x) != a.color(y) {
            let mut word = Vec::new();
            let mut cur = i;
            while let Some((prev, l)) = parents[cur].1 {
                word.push(l);
                cur = prev;
            }
            word.reverse();
            return Some(Word::from(word));
        }
        for l in a.alphabet().letters() {
            let pair = (a.next(x, l), a.next(y, l));
            if seen.insert(pair) {
                parents.push((pair, Some((i, l))));
                queue.push_back(parents.len() - 1);
            }
        }
    }
    None
}

/// Number of letters in a geometric walk with the given mean.
pub(crate) fn geometric_len(rng: &mut ChaCha8Rng, mean: usize) -> usize {
    let p = 1.0 / (1.0 + mean as f64);
    let mut n = 0;
    while !rng.gen_bool(p) {
        n += 1;
    }
    n
}

pub(crate) fn random_word(rng: &mut ChaCha8Rng, k: usize, len: usize) -> Word {
    (0..len).map(|_| Letter::new(rng.gen_range(0..k))).collect()
}

/// Randomized W-method search for a word on which `view` (the words the
/// hypothesis labels `label`) disagrees with `truth`.
///
/// Each of the `walks` candidates is the access word of a uniformly chosen
/// state, a random infix of geometric length with mean `mean_depth`, and
/// either a suffix from the view's characterization set or a random one.
pub fn random_w_method<E>(
    view: &Dfa,
    label: Label,
    mut truth: impl FnMut(&Word) -> Result<Label, E>,
    walks: usize,
    mean_depth: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Word>, E> {
    if walks == 0 {
        return Ok(None);
    }
    let access = view.access_words();
    let suffixes = characterization_set(view);
    let k = view.alphabet().len();
    for _ in 0..walks {
        let (_, prefix) = &access[rng.gen_range(0..access.len())];
        let infix_len = geometric_len(rng, mean_depth);
        let mut w = prefix.concat(&random_word(rng, k, infix_len));
        if !suffixes.is_empty() && rng.gen_bool(0.5) {
            w.extend_from(&suffixes[rng.gen_range(0..suffixes.len())]);
        } else {
            let len = geometric_len(rng, mean_depth);
            w.extend_from(&random_word(rng, k, len));
        }
        let in_view = view.is_accepting(view.run_from(view.initial(), &w));
        if (truth(&w)? == label) != in_view {
            return Ok(Some(w));
        }
    }
    Ok(None)
}
