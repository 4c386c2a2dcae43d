use crate::automata::{Alphabet, Dfa, Word};

use super::{Outcome, Sut, SutError};

/// A system described by two automata: `s` accepts the executable tests and
/// `b` the failing ones.
///
/// Construction checks `L(b) ⊆ L(s)` and that `L(b)` is extension closed
/// with respect to `L(s)`.
#[derive(Clone, Debug)]
pub struct SimulatedSut {
    s: Dfa,
    b: Dfa,
}

impl SimulatedSut {
    pub fn new(s: Dfa, b: Dfa) -> Result<Self, SutError> {
        if let Some(w) = b.subset_witness(&s)? {
            return Err(SutError::InvalidSystem(format!(
                "failing test `{}` is not executable",
                s.alphabet().render(&w)
            )));
        }
        // In S × B no failing state may reach an executable passing state.
        let product = s.product(&b, |s, b| (s, b))?;
        let passing: Vec<usize> = product
            .states()
            .filter(|&q| product.color(q) == (true, false))
            .collect();
        let reaches_passing = product.backward_reachable(passing);
        if let Some(q) = product
            .states()
            .find(|&q| product.color(q).1 && reaches_passing.contains(&q))
        {
            let access = product
                .access_words()
                .into_iter()
                .find(|(p, _)| *p == q)
                .map(|(_, w)| w)
                .unwrap_or_default();
            return Err(SutError::InvalidSystem(format!(
                "failures do not persist: `{}` fails but has a passing extension",
                s.alphabet().render(&access)
            )));
        }
        Ok(SimulatedSut {
            s: s.minimize(),
            b: b.minimize(),
        })
    }

    pub fn s(&self) -> &Dfa {
        &self.s
    }

    pub fn b(&self) -> &Dfa {
        &self.b
    }

    /// Automaton-level version of [`super::AdrSut`]: the same system with an
    /// `assert` letter appended, where a failure only shows once `delay`
    /// asserts have followed the earliest failing prefix.
    ///
    /// States track (S-state, B-state, asserts since the first failure,
    /// capped at `delay`).
    pub fn adr_wrap(&self, delay: usize) -> Result<SimulatedSut, SutError> {
        let base = self.s.alphabet();
        let alphabet = base.extended(super::ASSERT_LETTER)?;
        let assert = alphabet.letter(super::ASSERT_LETTER).expect("just added");

        type Node = (usize, usize, Option<usize>);
        let start_counter = self.b.is_accepting(self.b.initial()).then_some(0);
        let start: Node = (self.s.initial(), self.b.initial(), start_counter);
        let mut nodes = vec![start];
        let mut index = std::collections::HashMap::from([(start, 0usize)]);
        let mut delta = Vec::new();
        let mut head = 0;
        while head < nodes.len() {
            let (s, b, c) = nodes[head];
            head += 1;
            for a in alphabet.letters() {
                let next = if a == assert {
                    (s, b, c.map(|k| (k + 1).min(delay)))
                } else {
                    let s2 = self.s.next(s, a);
                    let b2 = self.b.next(b, a);
                    let c2 = c.or_else(|| self.b.is_accepting(b2).then_some(0));
                    (s2, b2, c2)
                };
                let id = *index.entry(next).or_insert_with(|| {
                    nodes.push(next);
                    nodes.len() - 1
                });
                delta.push(id);
            }
        }
        let s_acc: Vec<bool> = nodes
            .iter()
            .map(|&(s, _, _)| self.s.is_accepting(s))
            .collect();
        let b_acc: Vec<bool> = nodes
            .iter()
            .map(|&(s, _, c)| self.s.is_accepting(s) && c == Some(delay))
            .collect();
        let s_dfa = Dfa::new(alphabet.clone(), 0, delta.clone(), s_acc)?;
        let b_dfa = Dfa::new(alphabet, 0, delta, b_acc)?;
        SimulatedSut::new(s_dfa, b_dfa)
    }
}

impl Sut for SimulatedSut {
    fn alphabet(&self) -> &Alphabet {
        self.s.alphabet()
    }

    fn execute(&self, word: &Word) -> Result<Outcome, SutError> {
        if !self.s.accepts(word)? {
            return Ok(Outcome::Invalid);
        }
        if self.b.accepts(word)? {
            return Ok(Outcome::Failed);
        }
        debug_assert!(
            word.prefixes()
                .all(|p| !self.b.accepts(&p).unwrap_or(false)),
            "failing prefix of an executable passing word"
        );
        Ok(Outcome::Passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example() -> SimulatedSut {
        let ex = fixtures::two_letter();
        SimulatedSut::new(ex.s, ex.b).unwrap()
    }

    #[test]
    fn example_outcomes() {
        let sut = example();
        let w = |s: &str| fixtures::binary().word_from_chars(s).unwrap();
        assert_eq!(sut.execute(&w("00")).unwrap(), Outcome::Failed);
        assert_eq!(sut.execute(&w("1")).unwrap(), Outcome::Passed);
        assert_eq!(sut.execute(&w("")).unwrap(), Outcome::Invalid);
    }

    #[test]
    fn agrees_with_direct_classification() {
        let ex = fixtures::two_letter();
        let sut = example();
        for w in Word::all_up_to(ex.alphabet(), 8) {
            let expected = match (ex.s.accepts(&w).unwrap(), ex.b.accepts(&w).unwrap()) {
                (false, _) => Outcome::Invalid,
                (true, true) => Outcome::Failed,
                (true, false) => Outcome::Passed,
            };
            assert_eq!(sut.execute(&w).unwrap(), expected);
        }
    }

    #[test]
    fn rejects_bad_systems() {
        let ex = fixtures::two_letter();
        // B not contained in S
        let universal = Dfa::universal(ex.alphabet().clone()).unwrap();
        assert!(matches!(
            SimulatedSut::new(ex.s.clone(), universal),
            Err(SutError::InvalidSystem(_))
        ));
        // failures that do not persist: B = exactly {"1"} inside S = Σ*
        let sigma = ex.alphabet().clone();
        let only_one = Dfa::from_fn(
            sigma.clone(),
            3,
            0,
            |q, a| if q == 0 && a.index() == 1 { 1 } else { 2 },
            |q| q == 1,
        )
        .unwrap();
        let all = Dfa::universal(sigma).unwrap();
        assert!(matches!(
            SimulatedSut::new(all, only_one),
            Err(SutError::InvalidSystem(_))
        ));
    }

    #[test]
    fn failure_persistence_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for seed in 0..5 {
            let f = fixtures::random_fixture(seed, 2, 5);
            let sut = SimulatedSut::new(f.s.clone(), f.b.clone()).unwrap();
            let sigma = f.alphabet().clone();
            let random_word = |rng: &mut ChaCha8Rng| -> Word {
                let n = rng.gen_range(0..8);
                (0..n)
                    .map(|_| crate::automata::Letter::new(rng.gen_range(0..sigma.len())))
                    .collect()
            };
            for _ in 0..1000 {
                let w = random_word(&mut rng);
                let u = random_word(&mut rng);
                let wu = w.concat(&u);
                if sut.execute(&w).unwrap() == Outcome::Failed {
                    let o = sut.execute(&wu).unwrap();
                    assert!(o == Outcome::Failed || o == Outcome::Invalid);
                }
            }
        }
    }
}
