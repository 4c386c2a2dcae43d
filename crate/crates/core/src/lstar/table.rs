use std::collections::hash_map::Entry;
use std::collections::HashMap;

use indexmap::{IndexMap, IndexSet};

use crate::automata::{Alphabet, Label, ThreeDfa, Word};

/// Three-valued observation table. Rows are the short prefixes (kept
/// prefix closed) and their one-letter extensions; columns are suffixes
/// (kept suffix closed).
#[derive(Clone, Debug)]
pub struct ObservationTable {
    alphabet: Alphabet,
    prefixes: IndexSet<Word>,
    suffixes: Vec<Word>,
    cells: HashMap<Word, Label>,
}

impl ObservationTable {
    pub fn new(alphabet: Alphabet) -> Self {
        ObservationTable {
            alphabet,
            prefixes: IndexSet::from([Word::empty()]),
            suffixes: vec![Word::empty()],
            cells: HashMap::new(),
        }
    }

    pub fn prefixes(&self) -> impl Iterator<Item = &Word> {
        self.prefixes.iter()
    }

    pub fn suffixes(&self) -> &[Word] {
        &self.suffixes
    }

    /// Asks `query` for every missing cell.
    pub fn fill<E>(&mut self, mut query: impl FnMut(&Word) -> Result<Label, E>) -> Result<(), E> {
        let mut rows: Vec<Word> = self.prefixes.iter().cloned().collect();
        for p in self.prefixes.iter() {
            for a in self.alphabet.letters() {
                rows.push(p.with(a));
            }
        }
        for r in &rows {
            for e in &self.suffixes {
                let w = r.concat(e);
                if let Entry::Vacant(slot) = self.cells.entry(w) {
                    let label = query(slot.key())?;
                    slot.insert(label);
                }
            }
        }
        Ok(())
    }

    fn row(&self, prefix: &Word) -> Vec<Label> {
        self.suffixes
            .iter()
            .map(|e| self.cells[&prefix.concat(e)])
            .collect()
    }

    /// A one-letter extension whose row matches no short row.
    pub fn find_unclosed(&self) -> Option<Word> {
        let short: std::collections::HashSet<Vec<Label>> =
            self.prefixes.iter().map(|p| self.row(p)).collect();
        for p in &self.prefixes {
            for a in self.alphabet.letters() {
                let ext = p.with(a);
                if !short.contains(&self.row(&ext)) {
                    return Some(ext);
                }
            }
        }
        None
    }

    /// A new suffix `a·e` separating two short rows that look equal.
    pub fn find_inconsistency(&self) -> Option<Word> {
        let rows: Vec<(&Word, Vec<Label>)> =
            self.prefixes.iter().map(|p| (p, self.row(p))).collect();
        for (i, (p, rp)) in rows.iter().enumerate() {
            for (q, rq) in &rows[i + 1..] {
                if rp != rq {
                    continue;
                }
                for a in self.alphabet.letters() {
                    for e in &self.suffixes {
                        let (pe, qe) = (p.with(a).concat(e), q.with(a).concat(e));
                        if self.cells[&pe] != self.cells[&qe] {
                            let mut s = Word::from(vec![a]);
                            s.extend_from(e);
                            return Some(s);
                        }
                    }
                }
            }
        }
        None
    }

    pub fn add_prefix(&mut self, w: Word) {
        self.prefixes.insert(w);
    }

    pub fn add_suffix(&mut self, e: Word) {
        if !self.suffixes.contains(&e) {
            self.suffixes.push(e);
        }
    }

    /// Adds every prefix of `cex` as a short row.
    pub fn add_counterexample(&mut self, cex: &Word) {
        for p in cex.prefixes() {
            self.prefixes.insert(p);
        }
    }

    /// Hypothesis of a closed and consistent table: one state per distinct
    /// short row, labeled by its empty-suffix cell.
    pub fn hypothesis(&self) -> ThreeDfa {
        let mut states: IndexMap<Vec<Label>, &Word> = IndexMap::new();
        for p in &self.prefixes {
            states.entry(self.row(p)).or_insert(p);
        }
        let k = self.alphabet.len();
        let mut delta = Vec::with_capacity(states.len() * k);
        let mut labels = Vec::with_capacity(states.len());
        for (_, p) in &states {
            labels.push(self.cells[*p]);
            for a in self.alphabet.letters() {
                let target = states
                    .get_index_of(&self.row(&p.with(a)))
                    .expect("closed table");
                delta.push(target);
            }
        }
        let initial = states
            .get_index_of(&self.row(&Word::empty()))
            .expect("ε row");
        ThreeDfa::new(self.alphabet.clone(), initial, delta, labels)
            .expect("table hypothesis is total")
    }
}
