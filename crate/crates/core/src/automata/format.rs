//! Plain-text automaton files and Graphviz DOT export.
//!
//! ```text
//! # comments and blank lines are ignored
//! alphabet: 0 1
//! initial: s
//! accepting: r              # Dfa files
//! labels: s=Dont q=Rej r=Acc   # ThreeDfa files (instead of `accepting:`)
//! s 0 -> q
//! s 1 -> q
//! q 0 -> r
//! ```
//!
//! Header lines may appear in any order. States are introduced by any
//! mention; an optional `states:` line fixes their order. Missing
//! transitions are completed with a fresh sink (non-accepting, or labeled
//! `Dont`) unless [`ParseMode::Strict`] is requested. Parsed automata are
//! returned in canonical form. Serialization always writes the canonical
//! form with states named `q0`, `q1`, ... and every transition explicit.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Alphabet, Automaton, AutomatonError, Dfa, Label, StateColor, ThreeDfa};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Complete partial transition tables with an implicit sink.
    #[default]
    Complete,
    /// Every (state, letter) pair must have a transition.
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AutomatonKind {
    Dfa,
    ThreeDfa,
}

/// Guesses whether a file holds a [`Dfa`] or a [`ThreeDfa`] by looking for a
/// `labels:` header.
pub fn detect_kind(text: &str) -> AutomatonKind {
    let three = lines(text).any(|(_, toks)| toks.first().map(|t| t.1) == Some("labels:"));
    if three {
        AutomatonKind::ThreeDfa
    } else {
        AutomatonKind::Dfa
    }
}

type Tokens<'a> = Vec<(usize, &'a str)>;

/// Non-empty, comment-stripped lines as (line number, [(column, token)]).
fn lines(text: &str) -> impl Iterator<Item = (usize, Tokens<'_>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = Vec::new();
        let mut start = None;
        for (pos, c) in body.char_indices() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    toks.push((s + 1, &body[s..pos]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            toks.push((s + 1, &body[s..]));
        }
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn err(line: usize, column: usize, message: impl Into<String>) -> AutomatonError {
    AutomatonError::Parse {
        line,
        column,
        message: message.into(),
    }
}

struct Raw<'a> {
    alphabet: Alphabet,
    names: Vec<&'a str>,
    index: HashMap<&'a str, usize>,
    initial: usize,
    accepting: Option<Vec<usize>>,
    labels: Option<Vec<(usize, Label)>>,
    delta: HashMap<(usize, usize), usize>,
}

impl<'a> Raw<'a> {
    fn state(&mut self, name: &'a str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name);
        self.index.insert(name, self.names.len() - 1);
        self.names.len() - 1
    }
}

fn parse_raw(text: &str) -> Result<Raw<'_>, AutomatonError> {
    let all: Vec<_> = lines(text).collect();

    let mut alphabet = None;
    for (ln, toks) in &all {
        if toks[0].1 == "alphabet:" {
            if alphabet.is_some() {
                return Err(err(*ln, toks[0].0, "duplicate `alphabet:` header"));
            }
            let names = toks[1..].iter().map(|t| t.1.to_string());
            let sigma = Alphabet::new(names).map_err(|e| err(*ln, toks[0].0, e.to_string()))?;
            if sigma.is_empty() {
                return Err(err(*ln, toks[0].0, "alphabet must not be empty"));
            }
            alphabet = Some(sigma);
        }
    }
    let alphabet = alphabet.ok_or_else(|| err(1, 1, "missing `alphabet:` header"))?;

    let mut raw = Raw {
        alphabet,
        names: Vec::new(),
        index: HashMap::new(),
        initial: usize::MAX,
        accepting: None,
        labels: None,
        delta: HashMap::new(),
    };

    // `states:` fixes the numbering before anything else mentions a state.
    for (_, toks) in &all {
        if toks[0].1 == "states:" {
            for t in &toks[1..] {
                raw.state(t.1);
            }
        }
    }

    let mut initial = None;
    for (ln, toks) in &all {
        let (col, head) = toks[0];
        match head {
            "alphabet:" | "states:" => {}
            "initial:" => {
                if initial.is_some() {
                    return Err(err(*ln, col, "duplicate `initial:` header"));
                }
                match toks.as_slice() {
                    [_, (_, q)] => initial = Some(raw.state(q)),
                    _ => return Err(err(*ln, col, "`initial:` takes exactly one state")),
                }
            }
            "accepting:" => {
                if raw.accepting.is_some() {
                    return Err(err(*ln, col, "duplicate `accepting:` header"));
                }
                let states = toks[1..].iter().map(|t| raw.state(t.1)).collect();
                raw.accepting = Some(states);
            }
            "labels:" => {
                if raw.labels.is_some() {
                    return Err(err(*ln, col, "duplicate `labels:` header"));
                }
                let mut labels = Vec::new();
                for &(c, tok) in &toks[1..] {
                    let (q, l) = tok.split_once('=').ok_or_else(|| {
                        err(*ln, c, format!("expected `state=Label`, found `{tok}`"))
                    })?;
                    let label = Label::parse(l).ok_or_else(|| {
                        err(*ln, c, format!("unknown label `{l}` (Acc, Rej or Dont)"))
                    })?;
                    labels.push((raw.state(q), label));
                }
                raw.labels = Some(labels);
            }
            _ if head.ends_with(':') => {
                return Err(err(*ln, col, format!("unknown header `{head}`")));
            }
            _ => match toks.as_slice() {
                [(_, from), (lc, letter), (_, "->"), (_, to)] => {
                    let a = raw
                        .alphabet
                        .letter(letter)
                        .ok_or_else(|| err(*ln, *lc, format!("unknown letter `{letter}`")))?;
                    let p = raw.state(from);
                    let q = raw.state(to);
                    if let Some(&old) = raw.delta.get(&(p, a.index())) {
                        if old != q {
                            return Err(err(
                                *ln,
                                col,
                                format!("conflicting transition for `{from}` on `{letter}`"),
                            ));
                        }
                    }
                    raw.delta.insert((p, a.index()), q);
                }
                _ => {
                    return Err(err(
                        *ln,
                        col,
                        "expected a header or a transition `state letter -> state`",
                    ))
                }
            },
        }
    }
    raw.initial = initial.ok_or_else(|| err(1, 1, "missing `initial:` header"))?;
    Ok(raw)
}

fn build<C: StateColor>(
    raw: &Raw<'_>,
    mode: ParseMode,
    mut colors: Vec<C>,
    sink_color: C,
) -> Result<Automaton<C>, AutomatonError> {
    let n = raw.names.len();
    let k = raw.alphabet.len();
    let mut delta = Vec::with_capacity((n + 1) * k);
    let mut used_sink = false;
    for q in 0..n {
        for a in 0..k {
            match raw.delta.get(&(q, a)) {
                Some(&t) => delta.push(t),
                None if mode == ParseMode::Strict => {
                    return Err(AutomatonError::MissingTransition {
                        state: raw.names[q].to_string(),
                        letter: raw.alphabet.names()[a].clone(),
                    })
                }
                None => {
                    used_sink = true;
                    delta.push(n);
                }
            }
        }
    }
    if used_sink {
        delta.extend(std::iter::repeat_n(n, k));
        colors.push(sink_color);
    }
    Ok(Automaton::new(raw.alphabet.clone(), raw.initial, delta, colors)?.canonicalize())
}

pub fn parse_dfa(text: &str) -> Result<Dfa, AutomatonError> {
    parse_dfa_with(text, ParseMode::Complete)
}

pub fn parse_dfa_with(text: &str, mode: ParseMode) -> Result<Dfa, AutomatonError> {
    let raw = parse_raw(text)?;
    if raw.labels.is_some() {
        return Err(err(
            1,
            1,
            "`labels:` belongs to three-valued automata; use `accepting:`",
        ));
    }
    let mut colors = vec![false; raw.names.len()];
    for &q in raw.accepting.iter().flatten() {
        colors[q] = true;
    }
    build(&raw, mode, colors, false)
}

/// Parses a three-valued automaton; states without a label are `Dont`.
pub fn parse_three_dfa(text: &str) -> Result<ThreeDfa, AutomatonError> {
    parse_three_dfa_with(text, ParseMode::Complete)
}

pub fn parse_three_dfa_with(text: &str, mode: ParseMode) -> Result<ThreeDfa, AutomatonError> {
    let raw = parse_raw(text)?;
    if raw.accepting.is_some() {
        return Err(err(
            1,
            1,
            "`accepting:` belongs to two-valued automata; use `labels:`",
        ));
    }
    let mut colors = vec![Label::Dont; raw.names.len()];
    for &(q, l) in raw.labels.iter().flatten() {
        colors[q] = l;
    }
    build(&raw, mode, colors, Label::Dont)
}

fn write_transitions<C: StateColor>(out: &mut String, a: &Automaton<C>) {
    for q in a.states() {
        for letter in a.alphabet().letters() {
            let _ = writeln!(
                out,
                "q{} {} -> q{}",
                q,
                a.alphabet().name(letter),
                a.next(q, letter)
            );
        }
    }
}

fn header<C: StateColor>(a: &Automaton<C>) -> String {
    format!(
        "alphabet: {}\ninitial: q{}\n",
        a.alphabet().names().join(" "),
        a.initial()
    )
}

pub fn serialize_dfa(d: &Dfa) -> String {
    let d = d.canonicalize();
    let mut out = header(&d);
    let acc: Vec<String> = d
        .states()
        .filter(|&q| d.is_accepting(q))
        .map(|q| format!("q{q}"))
        .collect();
    if acc.is_empty() {
        out.push_str("accepting:\n");
    } else {
        let _ = writeln!(out, "accepting: {}", acc.join(" "));
    }
    write_transitions(&mut out, &d);
    out
}

pub fn serialize_three_dfa(t: &ThreeDfa) -> String {
    let t = t.canonicalize();
    let mut out = header(&t);
    let labels: Vec<String> = t
        .states()
        .map(|q| format!("q{}={}", q, t.label(q)))
        .collect();
    let _ = writeln!(out, "labels: {}", labels.join(" "));
    write_transitions(&mut out, &t);
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot<C: StateColor>(a: &Automaton<C>, name: &str, node: impl Fn(usize, C) -> String) -> String {
    let a = a.canonicalize();
    let mut out = format!("digraph {name} {{\n  rankdir=LR;\n  node [shape=circle];\n");
    for q in a.states() {
        let _ = writeln!(out, "  q{} [{}];", q, node(q, a.color(q)));
    }
    for q in a.states() {
        // group letters by target so parallel edges become one labeled edge
        let mut targets: Vec<(usize, Vec<&str>)> = Vec::new();
        for letter in a.alphabet().letters() {
            let t = a.next(q, letter);
            let name = a.alphabet().name(letter);
            match targets.iter_mut().find(|(x, _)| *x == t) {
                Some((_, names)) => names.push(name),
                None => targets.push((t, vec![name])),
            }
        }
        for (t, names) in targets {
            let _ = writeln!(
                out,
                "  q{} -> q{} [label=\"{}\"];",
                q,
                t,
                escape(&names.join(", "))
            );
        }
    }
    out.push_str("}\n");
    out
}

/// DOT rendering: accepting states are double circles; the initial state is
/// drawn bold.
pub fn dfa_to_dot(d: &Dfa) -> String {
    dot(d, "dfa", |q, acc| {
        let mut attrs = format!("label=\"q{q}\"");
        if acc {
            attrs.push_str(", shape=doublecircle");
        }
        if q == 0 {
            attrs.push_str(", style=bold");
        }
        attrs
    })
}

/// DOT rendering: every node shows its label; `Acc` states are double
/// circles, `Dont` states dashed, the initial state bold.
pub fn three_dfa_to_dot(t: &ThreeDfa) -> String {
    dot(t, "three_dfa", |q, label| {
        let mut attrs = format!("label=\"q{q}\\n{label}\"");
        if label == Label::Acc {
            attrs.push_str(", shape=doublecircle");
        }
        let style = match (label == Label::Dont, q == 0) {
            (true, true) => Some("\"dashed,bold\""),
            (true, false) => Some("dashed"),
            (false, true) => Some("bold"),
            (false, false) => None,
        };
        if let Some(style) = style {
            attrs.push_str(", style=");
            attrs.push_str(style);
        }
        attrs
    })
}
