//! Test-space languages `T`: the unrestricted, failure-driven and
//! assertion-driven models, the online-shop session automaton and the
//! interleaving composition used to run several sessions side by side.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::automata::format::parse_dfa;
use crate::automata::{Alphabet, AutomatonError, Dfa, Letter, Word};

#[derive(Debug, Error)]
pub enum TestModelError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("test model spec `{0}` is not one of sigma-star, contains:<letters>, ends-with:<letter>, file:<path>")]
    UnknownSpec(String),
    #[error("reading test model {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// A regular test space together with a note on where it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestModel {
    dfa: Dfa,
    description: String,
}

impl TestModel {
    /// Wraps an automaton; the stored form is minimal and canonical.
    pub fn new(dfa: Dfa, description: impl Into<String>) -> Self {
        TestModel {
            dfa: dfa.minimize(),
            description: description.into(),
        }
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.dfa.alphabet()
    }

    pub fn contains(&self, word: &Word) -> Result<bool, AutomatonError> {
        self.dfa.accepts(word)
    }

    pub fn size(&self) -> usize {
        self.dfa.len()
    }

    /// Builds a model from a command-line spec string:
    /// `sigma-star`, `contains:<letters>`, `ends-with:<letter>` or
    /// `file:<path>`. Letters in `contains:` are separated by commas or
    /// spaces.
    pub fn from_spec(spec: &str, alphabet: &Alphabet) -> Result<TestModel, TestModelError> {
        if spec == "sigma-star" {
            return Ok(sigma_star(alphabet)?);
        }
        if let Some(rest) = spec.strip_prefix("contains:") {
            let cex: Word = rest
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|n| alphabet.parse_letter(n))
                .collect::<Result<_, _>>()?;
            return Ok(contains_all_letters(alphabet, &cex)?);
        }
        if let Some(rest) = spec.strip_prefix("ends-with:") {
            let letter = alphabet.parse_letter(rest.trim())?;
            return Ok(ends_with(alphabet, letter)?);
        }
        if let Some(path) = spec.strip_prefix("file:") {
            let text =
                std::fs::read_to_string(Path::new(path)).map_err(|source| TestModelError::Io {
                    path: path.to_string(),
                    source,
                })?;
            let dfa = parse_dfa(&text)?;
            if dfa.alphabet() != alphabet {
                return Err(AutomatonError::AlphabetMismatch {
                    left: dfa.alphabet().names().to_vec(),
                    right: alphabet.names().to_vec(),
                }
                .into());
            }
            return Ok(TestModel::new(dfa, format!("file {path}")));
        }
        Err(TestModelError::UnknownSpec(spec.to_string()))
    }
}

/// The unrestricted test space `Σ*`.
pub fn sigma_star(alphabet: &Alphabet) -> Result<TestModel, AutomatonError> {
    Ok(TestModel::new(Dfa::universal(alphabet.clone())?, "Σ*"))
}

/// Words containing every distinct letter of `cex` at least once.
pub fn contains_all_letters(alphabet: &Alphabet, cex: &Word) -> Result<TestModel, AutomatonError> {
    alphabet.check_word(cex)?;
    let mut required: Vec<Letter> = cex.iter().copied().collect();
    required.sort();
    required.dedup();
    if required.len() > 20 {
        return Err(AutomatonError::Malformed(format!(
            "{} distinct letters exceed the subset construction limit",
            required.len()
        )));
    }
    let bit: HashMap<Letter, usize> = required.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let full = (1usize << required.len()) - 1;
    // states are the subsets of required letters seen so far
    let dfa = Dfa::from_fn(
        alphabet.clone(),
        full + 1,
        0,
        |seen, a| bit.get(&a).map_or(seen, |&i| seen | (1 << i)),
        |seen| seen == full,
    )?;
    let names: Vec<&str> = required.iter().map(|&a| alphabet.name(a)).collect();
    Ok(TestModel::new(
        dfa,
        format!("contains all of {{{}}}", names.join(", ")),
    ))
}

/// Words whose last letter is `letter`.
pub fn ends_with(alphabet: &Alphabet, letter: Letter) -> Result<TestModel, AutomatonError> {
    if !alphabet.contains(letter) {
        return Err(AutomatonError::ForeignLetter(letter.index()));
    }
    let dfa = Dfa::from_fn(
        alphabet.clone(),
        2,
        0,
        |_, a| usize::from(a == letter),
        |q| q == 1,
    )?;
    Ok(TestModel::new(dfa, format!("Σ*{}", alphabet.name(letter))))
}

/// Asynchronous composition of components over pairwise disjoint
/// alphabets: a letter moves only the component owning it, and a composite
/// state accepts iff at least one component accepts. The composite alphabet
/// lists the component alphabets in order.
pub fn interleave(components: &[Dfa]) -> Result<Dfa, AutomatonError> {
    let mut names = Vec::new();
    let mut owner = Vec::new();
    for (i, c) in components.iter().enumerate() {
        for (j, name) in c.alphabet().names().iter().enumerate() {
            if names.contains(name) {
                return Err(AutomatonError::OverlappingAlphabets(name.clone()));
            }
            names.push(name.clone());
            owner.push((i, Letter::new(j)));
        }
    }
    let alphabet = Alphabet::new(names)?;

    let start: Vec<usize> = components.iter().map(|c| c.initial()).collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut tuples = vec![start];
    let mut delta = Vec::new();
    let mut head = 0;
    while head < tuples.len() {
        let cur = tuples[head].clone();
        head += 1;
        for &(i, local) in &owner {
            let mut next = cur.clone();
            next[i] = components[i].next(cur[i], local);
            let id = *index.entry(next.clone()).or_insert_with(|| {
                tuples.push(next);
                tuples.len() - 1
            });
            delta.push(id);
        }
    }
    let colors = tuples
        .iter()
        .map(|t| t.iter().zip(components).any(|(&q, c)| c.is_accepting(q)))
        .collect();
    Dfa::new(alphabet, 0, delta, colors)
}

/// Letter names of session `i`.
pub struct ShopLetters;

impl ShopLetters {
    pub fn start(i: usize) -> String {
        format!("StartSession_{i}")
    }
    pub fn login(i: usize, user: &str) -> String {
        format!("Login_{i}({user})")
    }
    pub fn logout(i: usize) -> String {
        format!("Logout_{i}")
    }
    pub fn add(i: usize, product: &str) -> String {
        format!("AddToCart_{i}({product})")
    }
    pub fn remove(i: usize, product: &str) -> String {
        format!("RemoveFromCart_{i}({product})")
    }
    pub fn checkout(i: usize) -> String {
        format!("Checkout_{i}")
    }
}

/// Main flow of one online-shop session.
///
/// Five live states: q0 --StartSession--> q1 --Login(u)--> q2;
/// q2 loops on AddToCart(p) and moves to q3 on RemoveFromCart(p); q3 loops
/// on RemoveFromCart(p) and returns to q2 on AddToCart(p); Logout leads from
/// q2 and q3 back to q1; Checkout leads from q2 and q3 to q4. q3 and q4
/// accept. Everything else goes to a dead sink.
pub fn shop_session(
    session: usize,
    users: &[&str],
    products: &[&str],
) -> Result<Dfa, AutomatonError> {
    if users.is_empty() || products.is_empty() {
        return Err(AutomatonError::Malformed(
            "a shop session needs at least one user and one product".into(),
        ));
    }
    let i = session;
    let mut names = vec![ShopLetters::start(i)];
    names.extend(users.iter().map(|u| ShopLetters::login(i, u)));
    names.push(ShopLetters::logout(i));
    names.extend(products.iter().map(|p| ShopLetters::add(i, p)));
    names.extend(products.iter().map(|p| ShopLetters::remove(i, p)));
    names.push(ShopLetters::checkout(i));
    let alphabet = Alphabet::new(names)?;

    #[derive(PartialEq)]
    enum Kind {
        Start,
        Login,
        Logout,
        Add,
        Remove,
        Checkout,
    }
    let kind = |a: Letter| {
        let name = alphabet.name(a);
        if name.starts_with("StartSession_") {
            Kind::Start
        } else if name.starts_with("Login_") {
            Kind::Login
        } else if name.starts_with("Logout_") {
            Kind::Logout
        } else if name.starts_with("AddToCart_") {
            Kind::Add
        } else if name.starts_with("RemoveFromCart_") {
            Kind::Remove
        } else {
            Kind::Checkout
        }
    };
    const DEAD: usize = 5;
    Dfa::from_fn(
        alphabet.clone(),
        6,
        0,
        |q, a| match (q, kind(a)) {
            (0, Kind::Start) => 1,
            (1, Kind::Login) => 2,
            (2, Kind::Add) | (3, Kind::Add) => 2,
            (2, Kind::Remove) | (3, Kind::Remove) => 3,
            (2, Kind::Logout) | (3, Kind::Logout) => 1,
            (2, Kind::Checkout) | (3, Kind::Checkout) => 4,
            _ => DEAD,
        },
        |q| q == 3 || q == 4,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn sigma_star_examples() {
        let sigma = fixtures::binary();
        let t = sigma_star(&sigma).unwrap();
        assert_eq!(t.size(), 1);
        assert!(t.contains(&Word::empty()).unwrap());
        assert!(t.contains(&sigma.word_from_chars("0110").unwrap()).unwrap());
    }

    #[test]
    fn contains_all_letters_examples() {
        let sigma = fixtures::binary();
        let w = |s: &str| sigma.word_from_chars(s).unwrap();
        let t = contains_all_letters(&sigma, &w("10")).unwrap();
        assert!(t.contains(&w("01")).unwrap());
        assert!(!t.contains(&w("11")).unwrap());
        let eps = contains_all_letters(&sigma, &Word::empty()).unwrap();
        assert_eq!(eps.dfa(), sigma_star(&sigma).unwrap().dfa());
        let zeros = contains_all_letters(&sigma, &w("00")).unwrap();
        assert!(zeros.contains(&w("0")).unwrap());
        assert!(!zeros.contains(&w("1")).unwrap());
    }

    #[test]
    fn contains_all_letters_matches_enumeration() {
        let sigma = Alphabet::new(["a", "b", "c"]).unwrap();
        for cex in ["a", "ab", "cab", "bb"] {
            let cex = sigma.word_from_chars(cex).unwrap();
            let t = contains_all_letters(&sigma, &cex).unwrap();
            for w in Word::all_up_to(&sigma, 6) {
                let expected = cex.iter().all(|l| w.iter().any(|x| x == l));
                assert_eq!(t.contains(&w).unwrap(), expected);
            }
        }
    }

    #[test]
    fn ends_with_examples() {
        let sigma = fixtures::binary().extended("assert").unwrap();
        let a = sigma.letter("assert").unwrap();
        let t = ends_with(&sigma, a).unwrap();
        assert_eq!(t.size(), 2);
        assert!(!t.contains(&Word::empty()).unwrap());
        assert!(t.contains(&sigma.word("0 1 assert").unwrap()).unwrap());
        assert!(t.contains(&sigma.word("assert assert").unwrap()).unwrap());
        assert!(!t.contains(&sigma.word("assert 0").unwrap()).unwrap());
        assert!(ends_with(&fixtures::binary(), a).is_err());
    }

    #[test]
    fn spec_strings() {
        let sigma = fixtures::binary();
        assert_eq!(
            TestModel::from_spec("sigma-star", &sigma).unwrap().size(),
            1
        );
        let t = TestModel::from_spec("contains:1,0", &sigma).unwrap();
        assert!(!t.contains(&sigma.word("1 1").unwrap()).unwrap());
        let e = TestModel::from_spec("ends-with:1", &sigma).unwrap();
        assert!(e.contains(&sigma.word("0 1").unwrap()).unwrap());
        assert!(matches!(
            TestModel::from_spec("regex:.*", &sigma),
            Err(TestModelError::UnknownSpec(_))
        ));
        assert!(TestModel::from_spec("contains:2", &sigma).is_err());
    }

    #[test]
    fn shop_session_flow() {
        let d = shop_session(1, &["u"], &["p"]).unwrap();
        let sigma = d.alphabet().clone();
        // five live states plus the dead sink
        assert_eq!(d.len(), 6);
        assert_eq!(d.minimize().len(), 6);
        let ok = sigma.word("StartSession_1 Login_1(u) Checkout_1").unwrap();
        assert!(d.accepts(&ok).unwrap());
        assert!(!d.accepts(&sigma.word("Checkout_1").unwrap()).unwrap());
    }

    #[test]
    fn interleaved_sessions() {
        let one = shop_session(1, &["u"], &["p"]).unwrap();
        let two = shop_session(2, &["u"], &["p"]).unwrap();
        let both = interleave(&[one.clone(), two]).unwrap();
        let sigma = both.alphabet().clone();
        let w = sigma
            .word(
                "StartSession_1 Login_1(u) AddToCart_1(p) RemoveFromCart_1(p) AddToCart_1(p) \
                 StartSession_2 Login_2(u) Checkout_2 Checkout_1",
            )
            .unwrap();
        assert!(both.accepts(&w).unwrap());
        let bad = sigma.word("Login_1(u) StartSession_1").unwrap();
        assert!(!both.accepts(&bad).unwrap());

        let single = interleave(std::slice::from_ref(&one)).unwrap();
        assert!(single.equivalent(&one).unwrap().is_none());
        assert!(matches!(
            interleave(&[one.clone(), one]),
            Err(AutomatonError::OverlappingAlphabets(_))
        ));
    }

    #[test]
    fn double_add_then_remove_bug_is_product_with_session() {
        let f = fixtures::shop_double_remove();
        let sigma = f.alphabet().clone();
        let w = |t: &str| sigma.word(t).unwrap();
        assert!(f.b.accepts(f.cex.as_ref().unwrap()).unwrap());
        // in E but not executable
        assert!(!f
            .b
            .accepts(&w("AddToCart_1(x) AddToCart_1(x) RemoveFromCart_1(x)"))
            .unwrap());
        // executable but only one add
        assert!(!f
            .b
            .accepts(&w(
                "StartSession_1 Login_1(u) AddToCart_1(x) RemoveFromCart_1(x)"
            ))
            .unwrap());
        crate::sut::SimulatedSut::new(f.s, f.b).unwrap();
    }
}
