use crate::automata::{Alphabet, Letter, Word};

use super::{Outcome, Sut, SutError};

/// Name of the letter appended by the delayed-assertion wrapper.
pub const ASSERT_LETTER: &str = "assert";

/// Delayed-assertion wrapper around a base system.
///
/// The wrapped alphabet is the base alphabet plus [`ASSERT_LETTER`]. The
/// core of a word is the word with every assert removed. A word is invalid
/// iff its core is invalid for the base system. Otherwise it fails iff some
/// prefix of the core fails and the earliest such prefix is followed by at
/// least `delay` asserts.
pub struct AdrSut<S> {
    base: S,
    alphabet: Alphabet,
    assert: Letter,
    delay: usize,
}

impl<S: Sut> AdrSut<S> {
    pub fn new(base: S, delay: usize) -> Result<Self, SutError> {
        let alphabet = base.alphabet().extended(ASSERT_LETTER)?;
        let assert = alphabet.letter(ASSERT_LETTER).expect("just added");
        Ok(AdrSut {
            base,
            alphabet,
            assert,
            delay,
        })
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn assert_letter(&self) -> Letter {
        self.assert
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    /// The word with every assert removed, over the base alphabet.
    pub fn core(&self, word: &Word) -> Word {
        // base letters keep their indices in the extended alphabet
        word.iter().copied().filter(|&a| a != self.assert).collect()
    }
}

impl<S: Sut> Sut for AdrSut<S> {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn execute(&self, word: &Word) -> Result<Outcome, SutError> {
        self.alphabet.check_word(word)?;
        let core = self.core(word);
        if self.base.execute(&core)? == Outcome::Invalid {
            return Ok(Outcome::Invalid);
        }
        // asserts_after[k]: asserts following the k-th core letter
        let mut asserts_after = vec![0usize; core.len() + 1];
        let mut k = 0;
        for &a in word.iter() {
            if a == self.assert {
                asserts_after[k] += 1;
            } else {
                k += 1;
            }
        }
        let mut pending: usize = asserts_after.iter().sum();
        for (k, after) in asserts_after.iter().enumerate() {
            if self.base.execute(&core.prefix(k))? == Outcome::Failed {
                return Ok(if pending >= self.delay {
                    Outcome::Failed
                } else {
                    Outcome::Passed
                });
            }
            pending -= after;
        }
        Ok(Outcome::Passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sut::SimulatedSut;

    #[test]
    fn wrapper_and_automaton_route_agree() {
        let mut fixtures_under_test = vec![fixtures::two_letter()];
        fixtures_under_test.extend((0..6).map(|seed| fixtures::random_fixture(seed, 2, 4)));
        for f in fixtures_under_test {
            let base = SimulatedSut::new(f.s.clone(), f.b.clone()).unwrap();
            for delay in 0..3 {
                let wrapped = AdrSut::new(base.clone(), delay).unwrap();
                let automaton = base.adr_wrap(delay).unwrap();
                assert_eq!(wrapped.alphabet(), automaton.alphabet());
                for w in Word::all_up_to(wrapped.alphabet(), 6) {
                    assert_eq!(
                        wrapped.execute(&w).unwrap(),
                        automaton.execute(&w).unwrap(),
                        "{} delay {delay} on {}",
                        f.name,
                        wrapped.alphabet().render(&w)
                    );
                }
            }
        }
    }

    #[test]
    fn delay_on_two_letter() {
        let ex = fixtures::two_letter();
        let base = SimulatedSut::new(ex.s, ex.b).unwrap();
        let adr = AdrSut::new(base, 2).unwrap();
        let w = |s: &str| adr.alphabet().word(s).unwrap();
        assert_eq!(adr.execute(&w("1 0")).unwrap(), Outcome::Passed);
        assert_eq!(adr.execute(&w("1 0 assert")).unwrap(), Outcome::Passed);
        assert_eq!(
            adr.execute(&w("1 0 assert assert")).unwrap(),
            Outcome::Failed
        );
        assert_eq!(
            adr.execute(&w("1 assert 0 assert assert")).unwrap(),
            Outcome::Failed
        );
        assert_eq!(adr.execute(&w("assert 0")).unwrap(), Outcome::Invalid);
        assert_eq!(adr.execute(&w("0 1")).unwrap(), Outcome::Invalid);
    }
}
