//! Ready-made systems used by the test suites, the benchmark runner and the
//! demos: the two-letter example with `S = 00Σ* + 1Σ*` and
//! `B = 00Σ* + 1(1Σ)*0Σ*`, the two explanation automata drawn for it, and a
//! seeded generator of random simulated systems whose bug language is
//! extension closed by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::format::parse_dfa;
use crate::automata::{Alphabet, AutomatonError, Dfa, Label, ThreeDfa, Word};

/// A simulated system: test model `t`, executable tests `s`, failing tests
/// `b`, plus an optional known failing word.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub t: Dfa,
    pub s: Dfa,
    pub b: Dfa,
    pub cex: Option<Word>,
}

impl Fixture {
    pub fn alphabet(&self) -> &Alphabet {
        self.s.alphabet()
    }

    /// True classification of a word: Acc on `B ∩ T`, Rej on `(S ∖ B) ∩ T`,
    /// Dont elsewhere.
    pub fn label(&self, w: &Word) -> Result<Label, AutomatonError> {
        let in_t = self.t.accepts(w)?;
        let in_s = self.s.accepts(w)?;
        let in_b = self.b.accepts(w)?;
        Ok(match (in_t, in_s, in_b) {
            (true, _, true) => Label::Acc,
            (true, true, false) => Label::Rej,
            _ => Label::Dont,
        })
    }

    /// Minimal three-valued automaton capturing the fixture's classification.
    pub fn capture(&self) -> Result<ThreeDfa, AutomatonError> {
        let sb = self.s.product(&self.b, |s, b| (s, b))?;
        let t = self.t.product(&sb, |t, (s, b)| match (t, s, b) {
            (true, _, true) => Label::Acc,
            (true, true, false) => Label::Rej,
            _ => Label::Dont,
        })?;
        Ok(t.minimize())
    }

    pub fn with_test_model(&self, t: Dfa) -> Fixture {
        Fixture { t, ..self.clone() }
    }
}

pub fn binary() -> Alphabet {
    Alphabet::new(["0", "1"]).expect("valid alphabet")
}

fn dfa(text: &str) -> Dfa {
    parse_dfa(text).expect("fixture automaton parses")
}

/// `S = 00Σ* + 1Σ*`
pub fn two_letter_s() -> Dfa {
    dfa("alphabet: 0 1
         initial: e
         accepting: all
         e 0 -> z
         e 1 -> all
         z 0 -> all
         z 1 -> dead
         all 0 -> all
         all 1 -> all
         dead 0 -> dead
         dead 1 -> dead")
}

/// `B = 00Σ* + 1(1Σ)*0Σ*`
pub fn two_letter_b() -> Dfa {
    dfa("alphabet: 0 1
         initial: e
         accepting: bug
         e 0 -> z
         e 1 -> pair
         z 0 -> bug
         z 1 -> dead
         pair 0 -> bug
         pair 1 -> mid
         mid 0 -> pair
         mid 1 -> pair
         bug 0 -> bug
         bug 1 -> bug
         dead 0 -> dead
         dead 1 -> dead")
}

/// The two-letter example with an unrestricted test model.
pub fn two_letter() -> Fixture {
    let s = two_letter_s();
    Fixture {
        name: "two-letter".into(),
        t: Dfa::universal(binary()).expect("non-empty alphabet"),
        s,
        b: two_letter_b(),
        cex: Some(binary().word("1 0").expect("binary word")),
    }
}

/// Smallest failure explanation of the example: states s, q, r.
pub fn fe3() -> Dfa {
    dfa("alphabet: 0 1
         initial: s
         accepting: r
         s 0 -> q
         s 1 -> q
         q 1 -> s
         q 0 -> r
         r 0 -> r
         r 1 -> r")
}

/// Smallest early-detection failure explanation of the example: states s,
/// q1, q2, r.
pub fn edfe4() -> Dfa {
    dfa("alphabet: 0 1
         initial: s
         accepting: r
         s 0 -> r
         s 1 -> q1
         q1 0 -> r
         q1 1 -> q2
         q2 0 -> q1
         q2 1 -> q1
         r 0 -> r
         r 1 -> r")
}

/// One online-shop session with a single user `u` and product `x`, where a
/// removal after two additions of the same product fails.
pub fn shop_double_remove() -> Fixture {
    let s = crate::test_model::shop_session(1, &["u"], &["x"]).expect("valid session");
    let sigma = s.alphabet().clone();
    let add = sigma.letter("AddToCart_1(x)").expect("session letter");
    let remove = sigma.letter("RemoveFromCart_1(x)").expect("session letter");
    // Σ* Add Σ* Add Σ* Remove Σ*
    let e = Dfa::from_fn(
        sigma.clone(),
        4,
        0,
        |q, a| match q {
            0 | 1 if a == add => q + 1,
            2 if a == remove => 3,
            _ => q,
        },
        |q| q == 3,
    )
    .expect("total table");
    let b = e.intersect(&s).expect("same alphabet").minimize();
    let cex = sigma
        .word("StartSession_1 Login_1(u) AddToCart_1(x) AddToCart_1(x) RemoveFromCart_1(x)")
        .expect("session word");
    Fixture {
        name: "shop-double-remove".into(),
        t: Dfa::universal(sigma).expect("non-empty alphabet"),
        s,
        b,
        cex: Some(cex),
    }
}

fn random_dfa(rng: &mut ChaCha8Rng, alphabet: &Alphabet, max_states: usize, p_accept: f64) -> Dfa {
    let n = rng.gen_range(1..=max_states);
    let k = alphabet.len();
    let delta: Vec<usize> = (0..n * k).map(|_| rng.gen_range(0..n)).collect();
    let colors: Vec<bool> = (0..n).map(|_| rng.gen_bool(p_accept)).collect();
    Dfa::new(alphabet.clone(), 0, delta, colors).expect("generated table is total")
}

/// A random system over `alphabet_size` letters with an S-automaton of at
/// most `max_s_states` states. `B = S ∩ E` for a random extension-closed
/// `E`, so `B` is extension closed with respect to `S`. Both `B` and
/// `S ∖ B` are non-empty. Deterministic in `seed`.
pub fn random_fixture(seed: u64, alphabet_size: usize, max_s_states: usize) -> Fixture {
    let names: Vec<String> = (0..alphabet_size).map(|i| i.to_string()).collect();
    let alphabet = Alphabet::new(names).expect("distinct digit letters");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let s = random_dfa(&mut rng, &alphabet, max_s_states, 0.6).minimize();
        let e = random_dfa(&mut rng, &alphabet, 3, 0.4).make_extension_closed();
        let b = s.intersect(&e).expect("same alphabet").minimize();
        let passing = s.difference(&b).expect("same alphabet");
        if b.is_empty_language() || passing.is_empty_language() {
            continue;
        }
        let cex = b.find_word(|acc| acc);
        return Fixture {
            name: format!("random-{seed}"),
            t: Dfa::universal(alphabet.clone()).expect("non-empty alphabet"),
            s,
            b,
            cex,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_languages_by_enumeration() {
        let ex = two_letter();
        let sigma = binary();
        for w in Word::all_up_to(&sigma, 8) {
            let text: String = w.iter().map(|l| sigma.name(*l)).collect();
            let in_s = text.starts_with("00") || text.starts_with('1');
            // 1(1Σ)*0Σ*: after the leading 1, pairs starting with 1, then a 0
            let bytes = text.as_bytes();
            let mut in_b = text.starts_with("00");
            if bytes.first() == Some(&b'1') {
                let mut i = 1;
                while i < bytes.len() {
                    if bytes[i] == b'0' {
                        in_b = true;
                        break;
                    }
                    i += 2;
                }
            }
            assert_eq!(ex.s.accepts(&w).unwrap(), in_s, "S on {text}");
            assert_eq!(ex.b.accepts(&w).unwrap(), in_b, "B on {text}");
        }
    }

    #[test]
    fn example_capture_has_six_states() {
        let c = two_letter().capture().unwrap();
        assert_eq!(c.len(), 6);
    }

    #[test]
    fn random_fixtures_are_deterministic_and_extension_closed() {
        for seed in 0..30 {
            let f = random_fixture(seed, 2, 5);
            let g = random_fixture(seed, 2, 5);
            assert_eq!(f.s, g.s);
            assert_eq!(f.b, g.b);
            assert!(f.b.subset_witness(&f.s).unwrap().is_none());
            let sigma = f.alphabet().clone();
            for w in Word::all_up_to(&sigma, 5) {
                if f.b.accepts(&w).unwrap() {
                    for u in Word::all_up_to(&sigma, 3) {
                        let wu = w.concat(&u);
                        if f.s.accepts(&wu).unwrap() {
                            assert!(f.b.accepts(&wu).unwrap());
                        }
                    }
                }
            }
        }
    }
}
