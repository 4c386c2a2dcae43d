mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fexplain::automata::format::{
    detect_kind, dfa_to_dot, parse_dfa, parse_three_dfa, serialize_dfa, serialize_three_dfa,
    three_dfa_to_dot, AutomatonKind,
};
use fexplain::automata::{Alphabet, AutomatonError, Dfa, Label, ThreeDfa};
use fexplain::bench::{self, BenchError, BenchOptions, Setup};
use fexplain::fixtures::Fixture;
use fexplain::lstar::{learn, EquivalenceConfig, LearnError, Teacher, ViewCheck};
use fexplain::oracle::{self, OracleError};
use fexplain::pipeline::{
    explain_capture, run_pipeline, ErrorClass, PipelineConfig, PipelineError,
};
use fexplain::relabel::{check_consistency, ed_relabel, efe_relabel, ExplanationKind};
use fexplain::sut::{AdrSut, CachedSut, ExternalSut, SimulatedSut, Sut, SutError, TestRepo};
use fexplain::test_model::{TestModel, TestModelError};

use config::{ConfigError, ConfigFile};

#[derive(Parser)]
#[command(
    name = "fexplain",
    version,
    about = "Learn failure explanations for systems under test"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Global {
    /// Seed for randomized equivalence checks
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Longest word enumerated by oracle checks
    #[arg(long, global = true)]
    max_len: Option<usize>,
    /// Random walks per view in equivalence queries
    #[arg(long, global = true)]
    walks: Option<usize>,
    /// Write the learning transcript (JSON lines) here
    #[arg(long, global = true)]
    log: Option<PathBuf>,
    /// key=value defaults, overridden by flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Learn the capture automaton of a system
    Learn {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        learning: LearnArgs,
        /// Output file for the capture automaton
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Relabel a capture automaton
    Relabel {
        #[arg(long, value_enum)]
        kind: RelabelKind,
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Learn (or read) a capture automaton and extract explanations
    Explain {
        #[arg(long, value_parser = parse_kind, num_args = 1.., required = true)]
        kind: Vec<ExplanationKind>,
        /// Use this capture automaton instead of learning one
        #[arg(long)]
        capture: Option<PathBuf>,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        learning: LearnArgs,
        #[command(flatten)]
        extraction: ExtractArgs,
        /// Artifact directory
        #[arg(long, default_value = "fexplain-out")]
        out: PathBuf,
    },
    /// Run a benchmark setup over a fixture directory
    Bench {
        #[arg(long)]
        setup: Setup,
        dir: PathBuf,
        #[command(flatten)]
        learning: LearnArgs,
        #[command(flatten)]
        extraction: ExtractArgs,
        /// Per-fixture artifacts and report.jsonl go here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = bench::DEFAULT_ADR_DELAY)]
        adr_delay: usize,
    },
    /// Check automata against brute-force ground truth
    Verify {
        #[command(flatten)]
        system: SystemArgs,
        /// Capture automaton to check (default: computed from the system)
        #[arg(long)]
        capture: Option<PathBuf>,
        /// Candidate explanation to check for consistency
        #[arg(long)]
        candidate: Option<PathBuf>,
        #[arg(long, value_parser = parse_kind, default_value = "fe")]
        kind: ExplanationKind,
        /// Search for a smallest consistent DFA with at most this many states
        #[arg(long)]
        min_states: Option<usize>,
    },
    /// Render an automaton file as Graphviz DOT
    ExportDot {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RelabelKind {
    Efe,
    Ed,
    Edefe,
}

fn parse_kind(s: &str) -> Result<ExplanationKind, String> {
    s.parse()
}

#[derive(Args, Default)]
struct SystemArgs {
    /// Executable tests of a simulated system
    #[arg(long = "s", value_name = "FILE", requires = "b_file")]
    s_file: Option<PathBuf>,
    /// Failing tests of a simulated system
    #[arg(long = "b", value_name = "FILE", requires = "s_file")]
    b_file: Option<PathBuf>,
    /// Shell command of an external system speaking the line protocol
    #[arg(long, conflicts_with = "s_file", requires = "alphabet")]
    external: Option<String>,
    /// Letters of an external system, space separated
    #[arg(long)]
    alphabet: Option<String>,
    /// Per-response timeout of an external system
    #[arg(long, default_value_t = 10_000)]
    timeout_ms: u64,
    /// Wrap the system so failures show only after this many asserts
    #[arg(long)]
    adr_delay: Option<usize>,
    /// sigma-star, contains:<letters>, ends-with:<letter> or file:<path>
    #[arg(long, default_value = "sigma-star")]
    test_model: String,
    /// Persistent test repository
    #[arg(long)]
    repo: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    /// Compare hypotheses exactly with the simulated system's classification
    #[arg(long)]
    exact: bool,
    /// Run the three view checks concurrently (not reproducible)
    #[arg(long)]
    concurrent: bool,
    /// Mean random extension length of equivalence walks
    #[arg(long)]
    depth: Option<usize>,
    /// Largest product explored for the exact test-model check
    #[arg(long)]
    threshold: Option<usize>,
    #[arg(long)]
    max_rounds: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    extension_closed: bool,
    #[arg(long)]
    extra_depth: Option<usize>,
    /// Also search for provably minimal explanations up to this size
    #[arg(long)]
    minimal: Option<usize>,
}

/// Flags resolved against the config file and defaults.
struct Settings {
    seed: u64,
    max_len: usize,
    walks: usize,
    depth: usize,
    threshold: usize,
    max_rounds: usize,
    extra_depth: usize,
    jobs: usize,
    log: Option<PathBuf>,
}

impl Settings {
    fn resolve(
        g: &Global,
        learning: Option<&LearnArgs>,
        extraction: Option<&ExtractArgs>,
        jobs: Option<usize>,
    ) -> Result<Self> {
        let file = match &g.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let eq = EquivalenceConfig::default();
        let pick = |flag: Option<usize>, key: &str, default: usize| -> Result<usize> {
            Ok(flag.or(file.get(key)?).unwrap_or(default))
        };
        Ok(Settings {
            seed: g.seed.or(file.get("seed")?).unwrap_or(0),
            max_len: pick(g.max_len, "max_len", 8)?,
            walks: pick(g.walks, "walks", eq.walks_per_view)?,
            depth: pick(
                learning.and_then(|l| l.depth),
                "depth",
                eq.expected_walk_extra_depth,
            )?,
            threshold: pick(
                learning.and_then(|l| l.threshold),
                "threshold",
                eq.exact_subset_threshold,
            )?,
            max_rounds: pick(
                learning.and_then(|l| l.max_rounds),
                "max_rounds",
                fexplain::lstar::DEFAULT_MAX_ROUNDS,
            )?,
            extra_depth: pick(extraction.and_then(|e| e.extra_depth), "extra_depth", 4)?,
            jobs: pick(jobs, "jobs", 1)?,
            log: g
                .log
                .clone()
                .or(file.get::<String>("log")?.map(PathBuf::from)),
        })
    }

    fn pipeline(&self, learning: &LearnArgs, extraction: Option<&ExtractArgs>) -> PipelineConfig {
        let mut c = PipelineConfig {
            max_rounds: self.max_rounds,
            ..Default::default()
        };
        c.equivalence = EquivalenceConfig {
            seed: self.seed,
            walks_per_view: self.walks,
            expected_walk_extra_depth: self.depth,
            exact_subset_threshold: self.threshold.max(1),
            views: ViewCheck::Random,
            concurrent: learning.concurrent,
        };
        c.extract.extra_depth = self.extra_depth;
        if let Some(e) = extraction {
            c.extract.extension_closed = e.extension_closed;
            c.minimal_states = e.minimal;
        }
        c
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_dfa(path: &Path) -> Result<Dfa> {
    parse_dfa(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_three_dfa(path: &Path) -> Result<ThreeDfa> {
    parse_three_dfa(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// A system built from the command line, with the exact classification
/// when it is simulated.
struct System {
    sut: Box<dyn Sut>,
    test_model: TestModel,
    truth: Option<Fixture>,
}

fn build_system(args: &SystemArgs) -> Result<System> {
    let (sut, sim): (Box<dyn Sut>, Option<SimulatedSut>) = match (&args.s_file, &args.external) {
        (Some(s), None) => {
            let b = args.b_file.as_ref().expect("clap requires --b with --s");
            let mut sim = SimulatedSut::new(read_dfa(s)?, read_dfa(b)?)?;
            if let Some(d) = args.adr_delay {
                sim = sim.adr_wrap(d)?;
            }
            (Box::new(sim.clone()), Some(sim))
        }
        (None, Some(cmd)) => {
            let names = args.alphabet.as_deref().unwrap_or_default();
            let alphabet = Alphabet::new(names.split_whitespace())?;
            let mut command = Command::new("sh");
            command.arg("-c").arg(cmd);
            let ext =
                ExternalSut::spawn(command, alphabet, Duration::from_millis(args.timeout_ms))?;
            match args.adr_delay {
                Some(d) => (Box::new(AdrSut::new(ext, d)?), None),
                None => (Box::new(ext), None),
            }
        }
        _ => bail!(UsageError(
            "give either --s and --b, or --external with --alphabet".into()
        )),
    };
    let test_model = TestModel::from_spec(&args.test_model, sut.alphabet())?;
    let truth = sim.map(|sim| Fixture {
        name: "system".into(),
        t: test_model.dfa().clone(),
        s: sim.s().clone(),
        b: sim.b().clone(),
        cex: None,
    });
    Ok(System {
        sut,
        test_model,
        truth,
    })
}

fn cached(args: &SystemArgs, sut: Box<dyn Sut>) -> Result<CachedSut<Box<dyn Sut>>> {
    let repo = match &args.repo {
        Some(p) => TestRepo::open(p, sut.alphabet().clone())?,
        None => TestRepo::in_memory(sut.alphabet().clone()),
    };
    Ok(CachedSut::new(sut, repo))
}

fn views(learning: &LearnArgs, truth: Option<&Fixture>) -> Result<ViewCheck> {
    if !learning.exact {
        return Ok(ViewCheck::Random);
    }
    let truth =
        truth.ok_or_else(|| UsageError("--exact needs a simulated system (--s/--b)".into()))?;
    Ok(ViewCheck::Exact(truth.capture()?))
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn cmd_learn(
    g: &Global,
    system: &SystemArgs,
    learning: &LearnArgs,
    out: Option<&Path>,
) -> Result<()> {
    let s = Settings::resolve(g, Some(learning), None, None)?;
    let sys = build_system(system)?;
    let mut config = s.pipeline(learning, None);
    config.equivalence.views = views(learning, sys.truth.as_ref())?;
    let teacher = Teacher::new(sys.test_model, cached(system, sys.sut)?, config.equivalence)?;
    let result = learn(&teacher, config.max_rounds)?;
    if let Some(log) = &s.log {
        fs::write(log, result.transcript_json_lines())
            .with_context(|| format!("writing {}", log.display()))?;
    }
    write_out(out, &serialize_three_dfa(&result.capture))?;
    eprintln!(
        "{}",
        json!({
            "capture_size": result.capture.len(),
            "rounds": result.rounds,
            "membership_queries": result.membership_queries,
            "executions": result.executions,
        })
    );
    Ok(())
}

fn cmd_relabel(kind: RelabelKind, input: &Path, out: Option<&Path>) -> Result<()> {
    let t = read_three_dfa(input)?;
    let r = match kind {
        RelabelKind::Efe => efe_relabel(&t),
        RelabelKind::Ed => ed_relabel(&t)?,
        RelabelKind::Edefe => ed_relabel(&efe_relabel(&t))?,
    };
    write_out(out, &serialize_three_dfa(&r))
}

#[allow(clippy::too_many_arguments)]
fn cmd_explain(
    g: &Global,
    kinds: &[ExplanationKind],
    capture: Option<&Path>,
    system: &SystemArgs,
    learning: &LearnArgs,
    extraction: &ExtractArgs,
    out: &Path,
) -> Result<()> {
    let s = Settings::resolve(g, Some(learning), Some(extraction), None)?;
    let mut config = s.pipeline(learning, Some(extraction));
    let start = std::time::Instant::now();
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let (summary, explanations) = if let Some(path) = capture {
        let capture = read_three_dfa(path)?.minimize();
        let explanations = explain_capture(&capture, kinds, &config)?;
        fs::write(out.join("capture.3dfa"), serialize_three_dfa(&capture))?;
        let b_size = capture.view(&[Label::Acc]).minimize().len();
        let summary = json!({
            "capture_size": capture.len(),
            "b_size": b_size,
            "explanations": explanations.iter().map(|e| (e.kind, &e.summary)).collect::<std::collections::BTreeMap<_, _>>(),
        });
        for e in &explanations {
            fs::write(out.join(format!("{}.dfa", e.kind)), serialize_dfa(&e.dfa))?;
            fs::write(out.join(format!("{}.dot", e.kind)), dfa_to_dot(&e.dfa))?;
        }
        fs::write(
            out.join("summary.json"),
            serde_json::to_string_pretty(&summary)? + "\n",
        )?;
        (summary, explanations)
    } else {
        let sys = build_system(system)?;
        config.equivalence.views = views(learning, sys.truth.as_ref())?;
        let report = run_pipeline(cached(system, sys.sut)?, sys.test_model, kinds, &config)?;
        bench::write_artifacts(out, &report)?;
        if let Some(log) = &s.log {
            fs::write(log, report.transcript_json_lines())
                .with_context(|| format!("writing {}", log.display()))?;
        }
        (serde_json::to_value(&report.summary)?, report.explanations)
    };
    let mut record = json!({
        "kind": kinds[0].as_str(),
        "explanation_size": explanations[0].summary.size,
        "wall_ms": start.elapsed().as_millis() as u64,
        "seed": s.seed,
    });
    if let (Some(r), Some(m)) = (record.as_object_mut(), summary.as_object()) {
        for (k, v) in m {
            r.insert(k.clone(), v.clone());
        }
    }
    println!("{record}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    g: &Global,
    setup: Setup,
    dir: &Path,
    learning: &LearnArgs,
    extraction: &ExtractArgs,
    out: Option<&Path>,
    jobs: Option<usize>,
    adr_delay: usize,
) -> Result<bool> {
    let s = Settings::resolve(g, Some(learning), Some(extraction), jobs)?;
    let mut opts = BenchOptions::new(setup);
    opts.config = s.pipeline(learning, Some(extraction));
    opts.exact_views = learning.exact;
    opts.adr_delay = adr_delay;
    opts.out_dir = out.map(Path::to_path_buf);
    opts.jobs = s.jobs;
    let records = bench::run_bench(dir, &opts)?;
    let lines = bench::records_json_lines(&records);
    if let Some(out) = out {
        fs::create_dir_all(out)?;
        fs::write(out.join("report.jsonl"), &lines)?;
        fs::write(out.join("report.txt"), bench::render_table(&records, setup))?;
    }
    print!("{lines}");
    eprint!("{}", bench::render_table(&records, setup));
    Ok(records.iter().all(|r| r.error.is_none()))
}

fn cmd_verify(
    g: &Global,
    system: &SystemArgs,
    capture: Option<&Path>,
    candidate: Option<&Path>,
    kind: ExplanationKind,
    min_states: Option<usize>,
) -> Result<bool> {
    let s = Settings::resolve(g, None, None, None)?;
    let mut ok = true;
    let truth = if system.s_file.is_some() {
        let sys = build_system(system)?;
        sys.truth
    } else {
        None
    };
    let capture = match (capture, &truth) {
        (Some(p), _) => read_three_dfa(p)?,
        (None, Some(f)) => f.capture()?,
        (None, None) => bail!(UsageError(
            "verify needs --capture or a simulated system".into()
        )),
    };
    if let Some(f) = &truth {
        let words = oracle::enumerate_classify(f, s.max_len, oracle::DEFAULT_WORD_BUDGET)?;
        let mismatches = words
            .iter()
            .filter(|(w, l)| capture.classify(w).ok() != Some(**l))
            .count();
        println!(
            "classification: {} words up to length {}, {mismatches} mismatches",
            words.len(),
            s.max_len
        );
        ok &= mismatches == 0;
        if system.test_model == "sigma-star" {
            let efe = efe_relabel(&capture);
            let mut disagreements = 0;
            for (q, w) in capture.access_words() {
                if capture.label(q) == Label::Rej {
                    let may_pass = oracle::brute_may_pass(&f.s, &f.b, &w)?;
                    if may_pass != (efe.label(q) == Label::Rej) {
                        disagreements += 1;
                    }
                }
            }
            println!(
                "may-pass: {disagreements} disagreements with the eventual-failure relabeling"
            );
            ok &= disagreements == 0;
        }
    }
    let spec = kind.spec(&capture)?;
    if let Some(p) = candidate {
        let d = read_dfa(p)?;
        match check_consistency(&d, &spec)? {
            None => println!("candidate: consistent with {kind} ({} states)", d.len()),
            Some(w) => {
                println!(
                    "candidate: violates {kind} on `{}`",
                    d.alphabet().render(&w)
                );
                ok = false;
            }
        }
    }
    if let Some(n) = min_states {
        match oracle::exhaustive_min_consistent(&spec, n, oracle::DEFAULT_NODE_BUDGET)? {
            Some(d) => println!("minimal {kind}: {} states", d.len()),
            None => println!("minimal {kind}: none with at most {n} states"),
        }
    }
    Ok(ok)
}

fn cmd_export_dot(input: &Path, out: Option<&Path>) -> Result<()> {
    let text = read(input)?;
    let dot = match detect_kind(&text) {
        AutomatonKind::Dfa => {
            dfa_to_dot(&parse_dfa(&text).with_context(|| format!("parsing {}", input.display()))?)
        }
        AutomatonKind::ThreeDfa => three_dfa_to_dot(
            &parse_three_dfa(&text).with_context(|| format!("parsing {}", input.display()))?,
        ),
    };
    write_out(out, &dot)
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    // reject a bad config file even for commands that use none of its keys
    if let Some(p) = &g.config {
        ConfigFile::load(p)?;
    }
    match &cli.command {
        Cmd::Learn {
            system,
            learning,
            out,
        } => cmd_learn(g, system, learning, out.as_deref()).map(|_| true),
        Cmd::Relabel { kind, input, out } => {
            cmd_relabel(*kind, input, out.as_deref()).map(|_| true)
        }
        Cmd::Explain {
            kind,
            capture,
            system,
            learning,
            extraction,
            out,
        } => cmd_explain(
            g,
            kind,
            capture.as_deref(),
            system,
            learning,
            extraction,
            out,
        )
        .map(|_| true),
        Cmd::Bench {
            setup,
            dir,
            learning,
            extraction,
            out,
            jobs,
            adr_delay,
        } => cmd_bench(
            g,
            *setup,
            dir,
            learning,
            extraction,
            out.as_deref(),
            *jobs,
            *adr_delay,
        ),
        Cmd::Verify {
            system,
            capture,
            candidate,
            kind,
            min_states,
        } => cmd_verify(
            g,
            system,
            capture.as_deref(),
            candidate.as_deref(),
            *kind,
            *min_states,
        ),
        Cmd::ExportDot { input, out } => cmd_export_dot(input, out.as_deref()).map(|_| true),
    }
}

/// 2: input or usage, 3: budget, 4: transport, 1: anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<PipelineError>() {
            return match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Budget => 3,
                ErrorClass::Transport => 4,
                ErrorClass::Other => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<LearnError>() {
            return match e {
                LearnError::Budget(_) => 3,
                LearnError::Sut(SutError::Transport(_)) => 4,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<SutError>() {
            return match e {
                SutError::Transport(_) => 4,
                SutError::InvalidSystem(_) | SutError::Repo { .. } => 2,
                _ => 1,
            };
        }
        if matches!(
            cause.downcast_ref::<OracleError>(),
            Some(OracleError::Budget { .. })
        ) {
            return 3;
        }
        if cause.is::<UsageError>()
            || cause.is::<ConfigError>()
            || cause.is::<AutomatonError>()
            || cause.is::<TestModelError>()
            || cause.is::<std::io::Error>()
            || matches!(
                cause.downcast_ref::<BenchError>(),
                Some(BenchError::Io { .. } | BenchError::Format { .. })
            )
        {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
