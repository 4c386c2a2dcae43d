use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use indexmap::IndexMap;

use crate::automata::{Alphabet, Word};

use super::{Outcome, Sut, SutError};

/// Every executed test with its outcome, in execution order.
///
/// With a backing file each new record is appended as one line
/// `<passed|failed|invalid> <letters...>` and flushed immediately, so a
/// crashed run loses at most the test in flight.
#[derive(Debug)]
pub struct TestRepo {
    alphabet: Alphabet,
    records: IndexMap<Word, Outcome>,
    file: Option<(PathBuf, File)>,
}

impl TestRepo {
    pub fn in_memory(alphabet: Alphabet) -> Self {
        TestRepo {
            alphabet,
            records: IndexMap::new(),
            file: None,
        }
    }

    /// Opens (or creates) a repository file, loading existing records.
    pub fn open(path: impl AsRef<Path>, alphabet: Alphabet) -> Result<Self, SutError> {
        let path = path.as_ref().to_path_buf();
        let mut repo = TestRepo::in_memory(alphabet);
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                let err = |message: String| SutError::Repo {
                    path: path.display().to_string(),
                    message: format!("line {}: {message}", i + 1),
                };
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
                let outcome =
                    Outcome::parse(head).ok_or_else(|| err(format!("unknown outcome `{head}`")))?;
                let word = repo.alphabet.word(rest).map_err(|e| err(e.to_string()))?;
                match repo.records.get(&word) {
                    Some(&old) if old != outcome => {
                        return Err(err(format!("conflicting records {old} and {outcome}")))
                    }
                    Some(_) => {}
                    None => {
                        repo.records.insert(word, outcome);
                    }
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        repo.file = Some((path, file));
        Ok(repo)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, word: &Word) -> Option<Outcome> {
        self.records.get(word).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, Outcome)> {
        self.records.iter().map(|(w, o)| (w, *o))
    }

    /// Adds a record. Recording a different outcome for a known word is an
    /// integrity error.
    pub fn record(&mut self, word: Word, outcome: Outcome) -> Result<(), SutError> {
        if let Some(&old) = self.records.get(&word) {
            if old != outcome {
                return Err(SutError::Integrity {
                    word: self.alphabet.render(&word),
                    recorded: old,
                    observed: outcome,
                });
            }
            return Ok(());
        }
        if let Some((_, file)) = &mut self.file {
            let letters = self.alphabet.render_raw(&word);
            let line = if letters.is_empty() {
                format!("{outcome}\n")
            } else {
                format!("{outcome} {letters}\n")
            };
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        self.records.insert(word, outcome);
        Ok(())
    }

    pub fn path(&self) -> Option<&Path> {
        self.file.as_ref().map(|(p, _)| p.as_path())
    }
}

/// A system behind a test repository: each distinct word is executed at most
/// once, and the number of real executions is counted.
pub struct CachedSut<S> {
    inner: S,
    repo: Mutex<TestRepo>,
    executions: AtomicUsize,
}

impl<S: Sut> CachedSut<S> {
    pub fn new(inner: S, repo: TestRepo) -> Self {
        CachedSut {
            inner,
            repo: Mutex::new(repo),
            executions: AtomicUsize::new(0),
        }
    }

    pub fn in_memory(inner: S) -> Self {
        let repo = TestRepo::in_memory(inner.alphabet().clone());
        CachedSut::new(inner, repo)
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    /// Number of executions forwarded to the wrapped system.
    pub fn executions(&self) -> usize {
        self.executions.load(Ordering::Relaxed)
    }

    pub fn lookup(&self, word: &Word) -> Option<Outcome> {
        self.lock().get(word)
    }

    /// Snapshot of the repository in insertion order.
    pub fn records(&self) -> Vec<(Word, Outcome)> {
        self.lock().iter().map(|(w, o)| (w.clone(), o)).collect()
    }

    pub fn repo_len(&self) -> usize {
        self.lock().len()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, TestRepo> {
        self.repo.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl<S: Sut> Sut for CachedSut<S> {
    fn alphabet(&self) -> &Alphabet {
        self.inner.alphabet()
    }

    fn execute(&self, word: &Word) -> Result<Outcome, SutError> {
        self.inner.alphabet().check_word(word)?;
        // the lock is held across the execution so that concurrent callers
        // never run the same word twice
        let mut repo = self.lock();
        if let Some(o) = repo.get(word) {
            return Ok(o);
        }
        let outcome = self.inner.execute(word)?;
        self.executions.fetch_add(1, Ordering::Relaxed);
        repo.record(word.clone(), outcome)?;
        Ok(outcome)
    }
}
