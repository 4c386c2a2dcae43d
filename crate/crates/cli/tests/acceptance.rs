//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fexplain::automata::{Label, ThreeDfa, Word};
use fexplain::bench::{instantiate, Setup};
use fexplain::fixtures::{self, random_fixture, Fixture};
use fexplain::lstar::{learn, EquivalenceConfig, Teacher, ViewCheck};
use fexplain::oracle::{
    brute_may_pass, enumerate_classify, exhaustive_min_consistent, DEFAULT_NODE_BUDGET,
    DEFAULT_WORD_BUDGET,
};
use fexplain::pipeline::{run_pipeline, PipelineConfig, PipelineReport};
use fexplain::relabel::{check_consistency, ed_relabel, efe_relabel, ExplanationKind};
use fexplain::sut::{CachedSut, SimulatedSut, Sut};
use fexplain::test_model::sigma_star;

const SEED: u64 = 42;
const ADR_DELAY: usize = 3;

// pinned sizes
const EXAMPLE_FE: usize = 3;
const EXAMPLE_EDFE: usize = 4;
const EXAMPLE_B: usize = 6;
const ADR_FE: usize = 6;
const ADR_EFE: usize = 3;

// workloads
const RANDOM_FIXTURES: u64 = 100;
const CAPTURE_FIXTURES: u64 = 20;
const CLASSIFY_LEN: usize = 8;

// runtime limits
const LIMIT_EXAMPLE: Duration = Duration::from_secs(10);
const LIMIT_ORDERING: Duration = Duration::from_secs(300);
const LIMIT_CAPTURE: Duration = Duration::from_secs(300);
const LIMIT_ADR: Duration = Duration::from_secs(120);

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn config() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.equivalence.seed = SEED;
    c
}

fn pipeline(
    fixture: &Fixture,
    setup: Setup,
    kinds: &[ExplanationKind],
    config: &PipelineConfig,
) -> Result<PipelineReport, String> {
    let inst = instantiate(fixture, setup, ADR_DELAY).map_err(|e| e.to_string())?;
    let sut = CachedSut::in_memory(inst.sut);
    sut.execute(&inst.cex).map_err(|e| e.to_string())?;
    run_pipeline(sut, inst.test_model, kinds, config).map_err(|e| e.to_string())
}

fn size_of(report: &PipelineReport, kind: ExplanationKind) -> Result<usize, String> {
    report
        .explanation(kind)
        .map(|e| e.dfa.len())
        .ok_or_else(|| format!("no {kind} explanation"))
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure!(t < limit, "took {t:.1?}, limit {limit:?}");
    Ok(t)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let report = pipeline(
        &fixtures::two_letter(),
        Setup::Unr,
        &[ExplanationKind::Fe, ExplanationKind::Edfe],
        &config(),
    )?;
    let t = within(start, LIMIT_EXAMPLE)?;
    let fe = &report.explanation(ExplanationKind::Fe).ok_or("no FE")?.dfa;
    let edfe = &report
        .explanation(ExplanationKind::Edfe)
        .ok_or("no EDFE")?
        .dfa;
    ensure!(fe.len() == EXAMPLE_FE, "|FE| = {}", fe.len());
    ensure!(edfe.len() == EXAMPLE_EDFE, "|EDFE| = {}", edfe.len());
    if let Some(w) = fe.equivalent(&fixtures::fe3()).map_err(|e| e.to_string())? {
        return Err(format!("FE differs from the reference on {w:?}"));
    }
    if let Some(w) = edfe
        .equivalent(&fixtures::edfe4())
        .map_err(|e| e.to_string())?
    {
        return Err(format!("EDFE differs from the reference on {w:?}"));
    }
    Ok(format!(
        "|FE| = 3 and |EDFE| = 4, both equal to the reference languages, {t:.2?}"
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let capture = fixtures::two_letter()
        .capture()
        .map_err(|e| e.to_string())?;
    let report = pipeline(
        &fixtures::two_letter(),
        Setup::Unr,
        &[ExplanationKind::Fe, ExplanationKind::B],
        &config(),
    )?;
    let (fe, b) = (
        size_of(&report, ExplanationKind::Fe)?,
        size_of(&report, ExplanationKind::B)?,
    );
    ensure!(
        fe == EXAMPLE_FE && b == EXAMPLE_B,
        "two-letter example: |FE| = {fe}, |B| = {b}"
    );
    for (kind, expected) in [
        (ExplanationKind::Fe, EXAMPLE_FE),
        (ExplanationKind::B, EXAMPLE_B),
    ] {
        let spec = kind.spec(&capture).map_err(|e| e.to_string())?;
        let min = exhaustive_min_consistent(&spec, expected, DEFAULT_NODE_BUDGET)
            .map_err(|e| e.to_string())?
            .map(|d| d.len());
        ensure!(
            min == Some(expected),
            "oracle minimum for {kind} is {min:?}"
        );
    }

    let kinds = [ExplanationKind::Fe, ExplanationKind::B];
    let mut violations = Vec::new();
    for seed in 0..RANDOM_FIXTURES {
        let f = random_fixture(seed, 2, 5);
        let r = pipeline(&f, Setup::Unr, &kinds, &config())?;
        let (fe, b) = (
            size_of(&r, ExplanationKind::Fe)?,
            size_of(&r, ExplanationKind::B)?,
        );
        if fe > b {
            violations.push(format!("seed {seed}: |FE| {fe} > |B| {b}"));
        }
    }
    let t = within(start, LIMIT_ORDERING)?;
    ensure!(violations.is_empty(), "{}", violations.join("; "));
    Ok(format!(
        "3 < 6 (oracle-confirmed minima); |FE| <= |B| on {RANDOM_FIXTURES} random fixtures, {t:.2?}"
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut words = 0;
    for seed in 0..CAPTURE_FIXTURES {
        let alphabet_size = 2 + (seed as usize % 2);
        let f = random_fixture(1000 + seed, alphabet_size, 5);
        let sut = SimulatedSut::new(f.s.clone(), f.b.clone()).map_err(|e| e.to_string())?;
        let equivalence = EquivalenceConfig {
            seed: SEED,
            views: ViewCheck::Exact(f.capture().map_err(|e| e.to_string())?),
            ..EquivalenceConfig::default()
        };
        let t = sigma_star(f.alphabet()).map_err(|e| e.to_string())?;
        let teacher =
            Teacher::new(t, CachedSut::in_memory(sut), equivalence).map_err(|e| e.to_string())?;
        let learned = learn(&teacher, 500).map_err(|e| e.to_string())?;
        let truth =
            enumerate_classify(&f, CLASSIFY_LEN, DEFAULT_WORD_BUDGET).map_err(|e| e.to_string())?;
        for (w, label) in &truth {
            let got = learned.capture.classify(w).map_err(|e| e.to_string())?;
            ensure!(
                got == *label,
                "fixture {}: {} classified {got}, truth {label}",
                f.name,
                f.alphabet().render(w)
            );
        }
        words += truth.len();
    }
    let t = within(start, LIMIT_CAPTURE)?;
    Ok(format!(
        "{CAPTURE_FIXTURES} learned captures agree with enumeration on {words} words, {t:.2?}"
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let kinds = [ExplanationKind::Fe, ExplanationKind::Efe];
    let example = fixtures::two_letter();
    let report = pipeline(&example, Setup::Adr, &kinds, &config())?;
    let truth = instantiate(&example, Setup::Adr, ADR_DELAY)
        .map_err(|e| e.to_string())?
        .truth
        .capture()
        .map_err(|e| e.to_string())?;
    ensure!(
        report
            .capture
            .equivalent(&truth)
            .map_err(|e| e.to_string())?
            .is_none(),
        "learned ADR capture differs from the wrapped system"
    );
    let (fe, efe) = (
        size_of(&report, ExplanationKind::Fe)?,
        size_of(&report, ExplanationKind::Efe)?,
    );
    ensure!(efe < fe, "|EFE| {efe} is not below |FE| {fe}");
    ensure!(
        fe == ADR_FE && efe == ADR_EFE,
        "|FE| = {fe}, |EFE| = {efe}, pinned {ADR_FE}/{ADR_EFE}"
    );
    for e in &report.explanations {
        let spec = e
            .kind
            .spec(&report.capture)
            .map_err(|err| err.to_string())?;
        let v = check_consistency(&e.dfa, &spec).map_err(|err| err.to_string())?;
        ensure!(
            v.is_none(),
            "{} violates its specification on {v:?}",
            e.kind
        );
        // no consistent automaton one state smaller exists
        let smaller = exhaustive_min_consistent(&spec, e.dfa.len() - 1, DEFAULT_NODE_BUDGET)
            .map_err(|err| err.to_string())?;
        ensure!(smaller.is_none(), "{} is not minimal", e.kind);
    }
    let t = within(start, LIMIT_ADR)?;
    Ok(format!(
        "|EFE| = 3 < |FE| = 6, both consistent and minimal, {t:.2?}"
    ))
}

/// For every word of length at most `max_len`, whether some extension is
/// Acc and whether some extension is Rej, by walking the word tree `horizon`
/// levels deeper.
fn bounded_prefix_sets(
    t: &ThreeDfa,
    max_len: usize,
    horizon: usize,
) -> BTreeMap<Word, (bool, bool)> {
    let depth = max_len + horizon;
    let mut layers = vec![vec![Word::empty()]];
    for d in 0..depth {
        let next = layers[d]
            .iter()
            .flat_map(|w| t.alphabet().letters().map(move |a| w.with(a)))
            .collect();
        layers.push(next);
    }
    let k = t.alphabet().len();
    let own = |w: &Word| {
        let l = t.classify(w).expect("word over the capture alphabet");
        (l == Label::Acc, l == Label::Rej)
    };
    let mut below: Vec<(bool, bool)> = layers[depth].iter().map(own).collect();
    let mut out = BTreeMap::new();
    for d in (0..depth).rev() {
        // children of the i-th word at depth d are k*i .. k*i + k
        let here: Vec<(bool, bool)> = layers[d]
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let (mut acc, mut rej) = own(w);
                for c in &below[k * i..k * i + k] {
                    acc |= c.0;
                    rej |= c.1;
                }
                (acc, rej)
            })
            .collect();
        if d <= max_len {
            out.extend(layers[d].iter().cloned().zip(here.iter().copied()));
        }
        below = here;
    }
    out
}

fn criterion_5() -> Outcome {
    let mut rej_states = 0;
    let mut words = 0;
    for seed in 0..RANDOM_FIXTURES {
        let f = random_fixture(seed, 2, 5);
        let capture = f.capture().map_err(|e| e.to_string())?;
        let efe = efe_relabel(&capture);
        for (q, w) in capture.access_words() {
            if capture.label(q) != Label::Rej {
                continue;
            }
            let expected = brute_may_pass(&f.s, &f.b, &w).map_err(|e| e.to_string())?;
            ensure!(
                (efe.label(q) == Label::Rej) == expected,
                "seed {seed}: state {q} kept {} but may-pass is {expected}",
                efe.label(q)
            );
            rej_states += 1;
        }

        let ed = ed_relabel(&capture).map_err(|e| e.to_string())?;
        // any state is reachable within |capture| - 1 letters, so this
        // horizon makes the bounded prefix sets exact
        let pref = bounded_prefix_sets(&capture, CLASSIFY_LEN, capture.len() - 1);
        for (w, (in_pref_acc, in_pref_rej)) in pref {
            let acc = capture.classify(&w).map_err(|e| e.to_string())? == Label::Acc;
            let expected = acc || (in_pref_acc && !in_pref_rej);
            let got = ed.classify(&w).map_err(|e| e.to_string())? == Label::Acc;
            ensure!(
                got == expected,
                "seed {seed}: {} in Acc' is {got}, expected {expected}",
                f.alphabet().render(&w)
            );
            words += 1;
        }
    }
    Ok(format!(
        "{rej_states} Rej states match brute-force may-pass; Acc' matches prefix sets on {words} words"
    ))
}

fn criterion_6() -> Outcome {
    let mut closed = config();
    closed.extract.extension_closed = true;
    let example = fixtures::two_letter();
    let before = pipeline(&example, Setup::Unr, &[ExplanationKind::Fe], &config())?;
    let after = pipeline(&example, Setup::Unr, &[ExplanationKind::Fe], &closed)?;
    let fe = after.explanation(ExplanationKind::Fe).ok_or("no FE")?;
    ensure!(
        fe.summary.extension_closed,
        "extension closure was not applied"
    );
    ensure!(
        fe.dfa.is_extension_closed(),
        "a transition leaves the accepting region"
    );
    let n = size_of(&before, ExplanationKind::Fe)?;
    ensure!(
        fe.dfa.len() == n && n == EXAMPLE_FE,
        "state count {} vs {n}",
        fe.dfa.len()
    );
    let v = check_consistency(&fe.dfa, &fe.spec).map_err(|e| e.to_string())?;
    ensure!(v.is_none(), "inconsistent on {v:?}");
    Ok("closed FE keeps 3 states and stays consistent".into())
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run_bench(out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_fexplain"))
        .args(["--seed", &SEED.to_string(), "bench", "--setup", "unr"])
        .arg(fixtures_dir())
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        status.status.success(),
        "bench failed: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    Ok(())
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).expect("readable output dir") {
            let p = entry.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).expect("under root").to_path_buf();
                out.insert(rel, fs::read(&p).expect("readable artifact"));
            }
        }
    }
    out
}

fn records(bytes: &[u8]) -> Result<Vec<serde_json::Value>, String> {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).map_err(|e| e.to_string())?;
            v.as_object_mut()
                .ok_or("record is not an object")?
                .remove("wall_ms");
            Ok(v)
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_bench(&a)?;
    run_bench(&b)?;
    let (mut fa, mut fb) = (files(&a), files(&b));
    // the text table carries wall time; the records are compared without it
    for f in [&mut fa, &mut fb] {
        f.remove(Path::new("report.txt"));
    }
    let ra = records(
        &fa.remove(Path::new("report.jsonl"))
            .ok_or("no report.jsonl")?,
    )?;
    let rb = records(
        &fb.remove(Path::new("report.jsonl"))
            .ok_or("no report.jsonl")?,
    )?;
    ensure!(!ra.is_empty(), "empty report");
    ensure!(ra == rb, "report records differ");
    ensure!(
        fa.keys().eq(fb.keys()),
        "artifact sets differ: {:?} vs {:?}",
        fa.keys().collect::<Vec<_>>(),
        fb.keys().collect::<Vec<_>>()
    );
    for (path, bytes) in &fa {
        ensure!(fb[path] == *bytes, "{} differs", path.display());
    }
    Ok(format!(
        "{} artifacts and {} records identical",
        fa.len(),
        ra.len()
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        (1, "two-letter example FE/EDFE reproduction", criterion_1),
        (2, "FE no larger than B", criterion_2),
        (3, "capture correctness", criterion_3),
        (4, "ADR: EFE smaller than FE", criterion_4),
        (5, "relabelings vs definitions", criterion_5),
        (6, "extension-closed FE", criterion_6),
        (7, "bench determinism", criterion_7),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {n} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {n} {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
