use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::AutomatonError;

/// Index of a letter inside its [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u32);

impl Letter {
    pub fn new(index: usize) -> Self {
        Letter(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug)]
struct Inner {
    names: Vec<String>,
    lookup: HashMap<String, Letter>,
}

/// An ordered finite set of named letters.
///
/// The order given at construction is used for every deterministic
/// iteration (breadth-first searches, canonical numbering, serialization).
/// Cloning is cheap.
#[derive(Clone)]
pub struct Alphabet(Arc<Inner>);

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, AutomatonError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Vec::new();
        let mut lookup = HashMap::new();
        for name in names {
            let name: String = name.into();
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(AutomatonError::InvalidLetterName(name));
            }
            if lookup
                .insert(name.clone(), Letter::new(out.len()))
                .is_some()
            {
                return Err(AutomatonError::DuplicateLetter(name));
            }
            out.push(name);
        }
        Ok(Alphabet(Arc::new(Inner { names: out, lookup })))
    }

    pub fn len(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.names.is_empty()
    }

    pub fn letters(&self) -> impl ExactSizeIterator<Item = Letter> + Clone {
        (0..self.len()).map(Letter::new)
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.0.names[letter.index()]
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.0.lookup.get(name).copied()
    }

    pub fn contains(&self, letter: Letter) -> bool {
        letter.index() < self.len()
    }

    pub fn parse_letter(&self, name: &str) -> Result<Letter, AutomatonError> {
        self.letter(name)
            .ok_or_else(|| AutomatonError::UnknownLetter(name.to_string()))
    }

    /// Parses a whitespace-separated word. The empty string and `ε` both
    /// denote the empty word.
    pub fn word(&self, text: &str) -> Result<Word, AutomatonError> {
        let text = text.trim();
        if text == "ε" {
            return Ok(Word::empty());
        }
        text.split_whitespace()
            .map(|n| self.parse_letter(n))
            .collect()
    }

    /// Parses a word where every character is a letter, e.g. `"0110"` over
    /// `{0, 1}`.
    pub fn word_from_chars(&self, text: &str) -> Result<Word, AutomatonError> {
        let mut buf = [0u8; 4];
        text.chars()
            .map(|c| self.parse_letter(c.encode_utf8(&mut buf)))
            .collect()
    }

    pub fn check_word(&self, word: &Word) -> Result<(), AutomatonError> {
        match word.iter().find(|l| !self.contains(**l)) {
            Some(l) => Err(AutomatonError::ForeignLetter(l.index())),
            None => Ok(()),
        }
    }

    /// Space-separated rendering; `ε` for the empty word.
    pub fn render(&self, word: &Word) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        self.render_raw(word)
    }

    /// Space-separated rendering; the empty string for the empty word.
    pub fn render_raw(&self, word: &Word) -> String {
        let names: Vec<&str> = word.iter().map(|l| self.name(*l)).collect();
        names.join(" ")
    }

    /// A new alphabet with `extra` appended at the end.
    pub fn extended(&self, extra: &str) -> Result<Alphabet, AutomatonError> {
        if self.letter(extra).is_some() {
            return Err(AutomatonError::DuplicateLetter(extra.to_string()));
        }
        Alphabet::new(self.names().iter().cloned().chain([extra.to_string()]))
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.names == other.0.names
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

/// A finite sequence of letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Letter> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Letter] {
        &self.0
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    pub fn extend_from(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn with(&self, letter: Letter) -> Word {
        let mut w = self.clone();
        w.push(letter);
        w
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        w.extend_from(other);
        w
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word(self.0[start..].to_vec())
    }

    /// All prefixes, shortest first, including the empty word and `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = Word> + '_ {
        (0..=self.len()).map(|n| self.prefix(n))
    }

    /// Comparison by length first, then lexicographically by letter index.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }

    /// Every word over `alphabet` of length at most `max_len`, in shortlex
    /// order.
    pub fn all_up_to(alphabet: &Alphabet, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut layer = vec![Word::empty()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * alphabet.len());
            for w in &layer {
                for a in alphabet.letters() {
                    next.push(w.with(a));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Letter;
    type IntoIter = std::slice::Iter<'a, Letter>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
