use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::automata::{AutomatonError, Label, ThreeDfa, Word};
use crate::sut::{CachedSut, Sut};
use crate::test_model::TestModel;

use super::wmethod::{geometric_len, random_w_method};
use super::LearnError;

/// How the three view checks of an equivalence query find counterexamples.
#[derive(Clone, Debug)]
pub enum ViewCheck {
    /// Randomized W-method walks answered by membership queries.
    Random,
    /// Exact comparison against a known classification (simulated systems).
    Exact(ThreeDfa),
}

#[derive(Clone, Debug)]
pub struct EquivalenceConfig {
    pub seed: u64,
    pub walks_per_view: usize,
    pub expected_walk_extra_depth: usize,
    /// Largest product explored when checking the hypothesis against the
    /// test model exactly; beyond it the check samples instead.
    pub exact_subset_threshold: usize,
    pub views: ViewCheck,
    /// Run the three view checks on separate threads. Not reproducible.
    pub concurrent: bool,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        EquivalenceConfig {
            seed: 0,
            walks_per_view: 1000,
            expected_walk_extra_depth: 4,
            exact_subset_threshold: 100_000,
            views: ViewCheck::Random,
            concurrent: false,
        }
    }
}

/// Where an equivalence query found its counterexample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CexSource {
    Repo,
    OutsideTestModel,
    View(Label),
}

/// Answers membership and equivalence queries for a system restricted to a
/// test model. Every execution goes through the test repository.
pub struct Teacher<S> {
    test_model: TestModel,
    sut: CachedSut<S>,
    config: EquivalenceConfig,
    membership_queries: AtomicUsize,
}

fn view_seed(seed: u64, round: usize, tag: u64) -> u64 {
    // splitmix64 over the combined inputs
    let mut z = seed
        ^ (round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ tag.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn label_tag(label: Label) -> u64 {
    match label {
        Label::Acc => 1,
        Label::Rej => 2,
        Label::Dont => 3,
    }
}

impl<S: Sut> Teacher<S> {
    pub fn new(
        test_model: TestModel,
        sut: CachedSut<S>,
        config: EquivalenceConfig,
    ) -> Result<Self, LearnError> {
        if test_model.alphabet() != sut.alphabet() {
            return Err(AutomatonError::AlphabetMismatch {
                left: test_model.alphabet().names().to_vec(),
                right: sut.alphabet().names().to_vec(),
            }
            .into());
        }
        Ok(Teacher {
            test_model,
            sut,
            config,
            membership_queries: AtomicUsize::new(0),
        })
    }

    pub fn test_model(&self) -> &TestModel {
        &self.test_model
    }

    pub fn sut(&self) -> &CachedSut<S> {
        &self.sut
    }

    pub fn config(&self) -> &EquivalenceConfig {
        &self.config
    }

    pub fn membership_queries(&self) -> usize {
        self.membership_queries.load(Ordering::Relaxed)
    }

    /// Label of `w`: the recorded outcome if known, Dont outside the test
    /// model (without executing), otherwise the outcome of executing it.
    pub fn membership_query(&self, w: &Word) -> Result<Label, LearnError> {
        self.membership_queries.fetch_add(1, Ordering::Relaxed);
        self.sut.alphabet().check_word(w)?;
        if let Some(o) = self.sut.lookup(w) {
            return Ok(o.label());
        }
        if !self.test_model.contains(w)? {
            return Ok(Label::Dont);
        }
        Ok(self.sut.execute(w)?.label())
    }

    /// Counterexample search in order: recorded tests, hypothesis labels
    /// outside the test model, then the Acc, Rej and Dont views. Every
    /// returned word is one where the hypothesis and the teacher disagree.
    pub fn equivalence_query(
        &self,
        hyp: &ThreeDfa,
        round: usize,
    ) -> Result<Option<(Word, CexSource)>, LearnError> {
        if hyp.alphabet() != self.sut.alphabet() {
            return Err(AutomatonError::AlphabetMismatch {
                left: hyp.alphabet().names().to_vec(),
                right: self.sut.alphabet().names().to_vec(),
            }
            .into());
        }
        for (w, o) in self.sut.records() {
            if hyp.classify(&w)? != o.label() {
                return Ok(Some((w, CexSource::Repo)));
            }
        }
        if let Some(w) = self.outside_test_model(hyp, round)? {
            return Ok(Some((w, CexSource::OutsideTestModel)));
        }
        let found = if self.config.concurrent {
            self.views_concurrent(hyp, round)?
        } else {
            let mut found = None;
            for label in Label::ALL {
                if let Some(w) = self.check_view(hyp, label, round, &AtomicBool::new(false))? {
                    found = Some((w, CexSource::View(label)));
                    break;
                }
            }
            found
        };
        if let Some((w, _)) = &found {
            let truth = self.membership_query(w)?;
            assert_ne!(
                truth,
                hyp.classify(w)?,
                "equivalence query returned a non-counterexample"
            );
        }
        Ok(found)
    }

    /// A word labeled Acc or Rej by the hypothesis that lies outside T.
    fn outside_test_model(&self, hyp: &ThreeDfa, round: usize) -> Result<Option<Word>, LearnError> {
        let decided = hyp.view(&[Label::Acc, Label::Rej]);
        let t = self.test_model.dfa();
        let candidate =
            match decided
                .shortest_witness(t, Some(self.config.exact_subset_threshold), |d, t| d && !t)
            {
                Ok(w) => w,
                Err(AutomatonError::ProductLimit(_)) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(view_seed(self.config.seed, round, 0));
                    let k = hyp.alphabet().len();
                    let mut hit = None;
                    for _ in 0..self.config.walks_per_view {
                        let len =
                            geometric_len(&mut rng, self.config.expected_walk_extra_depth * 2);
                        let w: Word = (0..len)
                            .map(|_| crate::automata::Letter::new(rng.gen_range(0..k)))
                            .collect();
                        if decided.accepts(&w)? && !t.accepts(&w)? {
                            hit = Some(w);
                            break;
                        }
                    }
                    hit
                }
                Err(e) => return Err(e.into()),
            };
        match candidate {
            // a recorded test outside T keeps its recorded label, which the
            // repository scan already found to agree with the hypothesis
            Some(w) if self.sut.lookup(&w).is_some() => Ok(None),
            other => Ok(other),
        }
    }

    fn check_view(
        &self,
        hyp: &ThreeDfa,
        label: Label,
        round: usize,
        stop: &AtomicBool,
    ) -> Result<Option<Word>, LearnError> {
        match &self.config.views {
            ViewCheck::Exact(truth) => {
                let w = hyp.shortest_witness(truth, None, |h, t| (h == label) != (t == label))?;
                if let Some(w) = &w {
                    let answer = self.membership_query(w)?;
                    if answer != hyp.classify(w)? {
                        return Ok(Some(w.clone()));
                    }
                    return Err(LearnError::InconsistentTruth(hyp.alphabet().render(w)));
                }
                Ok(None)
            }
            ViewCheck::Random => {
                let view = hyp.view(&[label]);
                let mut rng =
                    ChaCha8Rng::seed_from_u64(view_seed(self.config.seed, round, label_tag(label)));
                random_w_method(
                    &view,
                    label,
                    |w| {
                        if stop.load(Ordering::Relaxed) {
                            // another view already succeeded: report agreement
                            return Ok(match (view.accepts(w)?, label) {
                                (true, l) => l,
                                (false, Label::Dont) => Label::Rej,
                                (false, _) => Label::Dont,
                            });
                        }
                        self.membership_query(w)
                    },
                    self.config.walks_per_view,
                    self.config.expected_walk_extra_depth,
                    &mut rng,
                )
            }
        }
    }

    fn views_concurrent(
        &self,
        hyp: &ThreeDfa,
        round: usize,
    ) -> Result<Option<(Word, CexSource)>, LearnError> {
        let stop = AtomicBool::new(false);
        let (tx, rx) = mpsc::channel();
        std::thread::scope(|scope| {
            for label in Label::ALL {
                let tx = tx.clone();
                let stop = &stop;
                scope.spawn(move || {
                    let r = self.check_view(hyp, label, round, stop);
                    if matches!(r, Ok(Some(_)) | Err(_)) {
                        stop.store(true, Ordering::Relaxed);
                    }
                    let _ = tx.send((label, r));
                });
            }
        });
        drop(tx);
        let mut first = None;
        for (label, r) in rx {
            match r? {
                Some(w) if first.is_none() => first = Some((w, CexSource::View(label))),
                _ => {}
            }
        }
        Ok(first)
    }
}
