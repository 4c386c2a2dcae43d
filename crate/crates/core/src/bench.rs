//! Benchmark setups over a directory of simulated systems.
//!
//! Each fixture is a subdirectory holding `s.dfa` (executable tests),
//! `b.dfa` (failing tests) and `cex` (one failing word, letters separated
//! by spaces). Fixtures run in directory-name order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use crate::automata::format::{dfa_to_dot, parse_dfa, serialize_dfa, serialize_three_dfa};
use crate::automata::{AutomatonError, Dfa, Word};
use crate::fixtures::Fixture;
use crate::lstar::ViewCheck;
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineError, PipelineReport};
use crate::relabel::ExplanationKind;
use crate::sut::{CachedSut, SimulatedSut, Sut, SutError, ASSERT_LETTER};
use crate::test_model::{self, TestModel};

pub const DEFAULT_ADR_DELAY: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Setup {
    /// Unrestricted test space.
    Unr,
    /// Tests containing every letter of the counterexample.
    Fdr,
    /// Failures delayed by asserts; tests end with an assert.
    Adr,
}

impl Setup {
    pub fn as_str(self) -> &'static str {
        match self {
            Setup::Unr => "unr",
            Setup::Fdr => "fdr",
            Setup::Adr => "adr",
        }
    }

    /// The explanations reported for the setup.
    pub fn kinds(self) -> &'static [ExplanationKind] {
        use ExplanationKind::*;
        match self {
            Setup::Unr => &[Fe, B],
            Setup::Fdr => &[Fe, Edfe, B],
            Setup::Adr => &[Fe, Efe, B],
        }
    }
}

impl FromStr for Setup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "unr" => Ok(Setup::Unr),
            "fdr" => Ok(Setup::Fdr),
            "adr" => Ok(Setup::Adr),
            _ => Err(format!("unknown setup `{s}` (expected unr, fdr or adr)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: String,
        source: AutomatonError,
    },
    #[error(transparent)]
    Sut(#[from] SutError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

fn read(path: &Path) -> Result<String, BenchError> {
    fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, content: &str) -> Result<(), BenchError> {
    fs::write(path, content).map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Subdirectories of `dir`, sorted by name.
pub fn fixture_dirs(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let io = |source| BenchError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        if entry.file_type().map_err(io)?.is_dir() {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}

/// Reads one fixture directory. The test model is left unrestricted.
pub fn load_fixture(dir: &Path) -> Result<Fixture, BenchError> {
    let dfa = |name: &str| -> Result<Dfa, BenchError> {
        let path = dir.join(name);
        parse_dfa(&read(&path)?).map_err(|source| BenchError::Format {
            path: path.display().to_string(),
            source,
        })
    };
    let s = dfa("s.dfa")?;
    let b = dfa("b.dfa")?;
    let cex_path = dir.join("cex");
    let cex = s
        .alphabet()
        .word(&read(&cex_path)?)
        .map_err(|source| BenchError::Format {
            path: cex_path.display().to_string(),
            source,
        })?;
    Ok(Fixture {
        name: dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        t: Dfa::universal(s.alphabet().clone())?,
        s,
        b,
        cex: Some(cex),
    })
}

/// Writes a fixture in the directory layout read by [`load_fixture`].
pub fn write_fixture(dir: &Path, fixture: &Fixture) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(|source| BenchError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    write(&dir.join("s.dfa"), &serialize_dfa(&fixture.s))?;
    write(&dir.join("b.dfa"), &serialize_dfa(&fixture.b))?;
    let cex = fixture
        .cex
        .as_ref()
        .map(|w| fixture.alphabet().render(w))
        .unwrap_or_default();
    write(&dir.join("cex"), &(cex + "\n"))
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub setup: Setup,
    pub config: PipelineConfig,
    /// Compare hypotheses exactly against the known classification instead
    /// of random walks.
    pub exact_views: bool,
    pub adr_delay: usize,
    /// Per-fixture artifacts go to `<out_dir>/<fixture>/`.
    pub out_dir: Option<PathBuf>,
    pub jobs: usize,
}

impl BenchOptions {
    pub fn new(setup: Setup) -> Self {
        BenchOptions {
            setup,
            config: PipelineConfig::default(),
            exact_views: false,
            adr_delay: DEFAULT_ADR_DELAY,
            out_dir: None,
            jobs: 1,
        }
    }
}

/// One report row.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BenchRecord {
    pub fixture: String,
    pub setup: String,
    pub seed: u64,
    pub cex_len: Option<usize>,
    pub sigma: Option<usize>,
    pub t_size: Option<usize>,
    pub capture_size: Option<usize>,
    pub b_size: Option<usize>,
    pub fe: Option<usize>,
    pub efe: Option<usize>,
    pub edfe: Option<usize>,
    pub rounds: Option<usize>,
    pub membership_queries: Option<usize>,
    pub executions: Option<usize>,
    pub wall_ms: u128,
    pub error: Option<String>,
}

/// What a setup derives from a fixture.
pub struct Instance {
    pub sut: SimulatedSut,
    pub test_model: TestModel,
    /// The exact classification within the test model.
    pub truth: Fixture,
    /// The fixture's failing word as a test of this setup.
    pub cex: Word,
}

pub fn instantiate(
    fixture: &Fixture,
    setup: Setup,
    adr_delay: usize,
) -> Result<Instance, BenchError> {
    let base = SimulatedSut::new(fixture.s.clone(), fixture.b.clone())?;
    let cex = fixture.cex.clone().unwrap_or_default();
    let (sut, test_model, cex) = match setup {
        Setup::Unr => (base, test_model::sigma_star(fixture.alphabet())?, cex),
        Setup::Fdr => {
            let t = test_model::contains_all_letters(fixture.alphabet(), &cex)?;
            (base, t, cex)
        }
        Setup::Adr => {
            let sut = base.adr_wrap(adr_delay)?;
            let sigma = sut.alphabet().clone();
            let assert = sigma.letter(ASSERT_LETTER).expect("wrapped alphabet");
            let t = test_model::ends_with(&sigma, assert)?;
            let mut wrapped = cex;
            for _ in 0..adr_delay {
                wrapped.push(assert);
            }
            (sut, t, wrapped)
        }
    };
    let truth = Fixture {
        name: fixture.name.clone(),
        t: test_model.dfa().clone(),
        s: sut.s().clone(),
        b: sut.b().clone(),
        cex: Some(cex.clone()),
    };
    Ok(Instance {
        sut,
        test_model,
        truth,
        cex,
    })
}

fn run_one(dir: &Path, opts: &BenchOptions) -> BenchRecord {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let start = std::time::Instant::now();
    let mut record = BenchRecord {
        fixture: name.clone(),
        setup: opts.setup.as_str().to_string(),
        seed: opts.config.equivalence.seed,
        ..Default::default()
    };
    let outcome = (|| -> Result<(), BenchError> {
        let fixture = load_fixture(dir)?;
        let inst = instantiate(&fixture, opts.setup, opts.adr_delay)?;
        record.cex_len = Some(inst.cex.len());
        record.sigma = Some(inst.test_model.alphabet().len());
        record.t_size = (opts.setup != Setup::Unr).then(|| inst.test_model.size());
        let mut config = opts.config.clone();
        if opts.exact_views {
            config.equivalence.views = ViewCheck::Exact(inst.truth.capture()?);
        }
        // the known failing test forms the initial test repository
        let sut = CachedSut::in_memory(inst.sut);
        sut.execute(&inst.cex)?;
        let report = run_pipeline(sut, inst.test_model, opts.setup.kinds(), &config)?;
        let s = &report.summary;
        record.capture_size = Some(s.capture_size);
        record.b_size = Some(s.b_size);
        let size = |k| s.explanations.get(&k).map(|e| e.size);
        record.fe = size(ExplanationKind::Fe);
        record.efe = size(ExplanationKind::Efe);
        record.edfe = size(ExplanationKind::Edfe);
        record.rounds = Some(s.rounds);
        record.membership_queries = Some(s.membership_queries);
        record.executions = Some(s.executions);
        if let Some(out) = &opts.out_dir {
            write_artifacts(&out.join(&name), &report)?;
        }
        Ok(())
    })();
    record.wall_ms = start.elapsed().as_millis();
    if let Err(e) = outcome {
        record.error = Some(e.to_string());
    }
    record
}

/// Writes the capture, each explanation (text and DOT), the transcript, the
/// test repository and the reproducible summary of a pipeline run.
pub fn write_artifacts(dir: &Path, report: &PipelineReport) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(|source| BenchError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    write(
        &dir.join("capture.3dfa"),
        &serialize_three_dfa(&report.capture),
    )?;
    for e in &report.explanations {
        write(&dir.join(format!("{}.dfa", e.kind)), &serialize_dfa(&e.dfa))?;
        write(&dir.join(format!("{}.dot", e.kind)), &dfa_to_dot(&e.dfa))?;
    }
    write(
        &dir.join("transcript.jsonl"),
        &report.transcript_json_lines(),
    )?;
    let sigma = report.capture.alphabet();
    let mut repo = String::new();
    for (w, o) in &report.repo {
        let letters = sigma.render_raw(w);
        let _ = writeln!(repo, "{}", format!("{o} {letters}").trim_end());
    }
    write(&dir.join("repo.txt"), &repo)?;
    let summary = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    write(&dir.join("summary.json"), &(summary + "\n"))
}

/// Runs every fixture under `dir`. Failures are recorded per fixture.
pub fn run_bench(dir: &Path, opts: &BenchOptions) -> Result<Vec<BenchRecord>, BenchError> {
    let dirs = fixture_dirs(dir)?;
    let jobs = opts.jobs.max(1).min(dirs.len().max(1));
    let results: Mutex<Vec<Option<BenchRecord>>> = Mutex::new(vec![None; dirs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= dirs.len() {
                    break;
                }
                let r = run_one(&dirs[i], opts);
                results.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
            });
        }
    });
    Ok(results
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("every fixture ran"))
        .collect())
}

pub fn records_json_lines(records: &[BenchRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

/// Plain-text table with one row per fixture.
pub fn render_table(records: &[BenchRecord], setup: Setup) -> String {
    let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
    let mut header = vec!["fixture", "|cex|", "|Σ|"];
    if setup != Setup::Unr {
        header.push("|T|");
    }
    header.extend(["|3DFA|", "time(s)"]);
    let kinds = setup.kinds();
    let kind_header: Vec<String> = kinds
        .iter()
        .map(|k| format!("|{}|", k.as_str().to_uppercase()))
        .collect();
    let mut rows: Vec<Vec<String>> = vec![header
        .iter()
        .map(|s| s.to_string())
        .chain(kind_header)
        .chain(["error".to_string()])
        .collect()];
    for r in records {
        let mut row = vec![r.fixture.clone(), opt(r.cex_len), opt(r.sigma)];
        if setup != Setup::Unr {
            row.push(opt(r.t_size));
        }
        row.push(opt(r.capture_size));
        row.push(format!("{:.2}", r.wall_ms as f64 / 1000.0));
        for k in kinds {
            row.push(opt(match k {
                ExplanationKind::Fe => r.fe,
                ExplanationKind::Efe => r.efe,
                ExplanationKind::Edfe => r.edfe,
                ExplanationKind::B => r.b_size,
                ExplanationKind::Edefe => None,
            }));
        }
        row.push(r.error.clone().unwrap_or_default());
        rows.push(row);
    }
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        if i == 0 {
            let _ = writeln!(
                out,
                "{}",
                "-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1))
            );
        }
    }
    out
}
