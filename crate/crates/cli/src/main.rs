use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use typicality_core::combination::{revise, CombineOptions};
use typicality_core::probabilistic::{build_index, enumerate_extensions, RangeVerdict};
use typicality_core::skeptical::build_base;
use typicality_core::{
    compute_ranking, encode, oracle_entails, oracle_min_canonical_entails, parse_concept, parse_kb, parse_query,
    prob_entails, query_probability, rc_entails, sc_entails, serialize_kb, tr_entails, CanonicalVerdict, Concept,
    Dialect, Error, KnowledgeBase, LeftConcept, OracleVerdict, Probability, Query,
};

const SCHEMA: u64 = 1;

#[derive(Parser)]
#[command(name = "dlt", version, about = "Reasoning with typicality in description logics")]
struct Cli {
    /// Print one JSON object instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    /// Print intermediate detail.
    #[arg(long, global = true)]
    trace: bool,
    /// Give up after this many seconds.
    #[arg(long, global = true, value_name = "SECONDS")]
    timeout: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Mono,
    Rc,
    Sc,
    Oracle,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Mono => "mono",
            Mode::Rc => "rc",
            Mode::Sc => "sc",
            Mode::Oracle => "oracle",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check that the knowledge base has a model.
    Check { kb: PathBuf },
    /// Decide a query under one of the entailment modes.
    Query {
        kb: PathBuf,
        query: String,
        /// mono: monotonic; rc: rational closure; sc: skeptical closure; oracle: small-model search.
        #[arg(long, value_enum, default_value = "rc")]
        mode: Mode,
        /// Largest domain the oracle mode enumerates.
        #[arg(long, default_value_t = 4)]
        domain_bound: usize,
        /// Print the skeptical base (sc mode).
        #[arg(long)]
        show_base: bool,
        /// Print the ALC translation (mono mode).
        #[arg(long)]
        emit_encoding: bool,
    },
    /// Print the rational-closure ranking.
    Rank { kb: PathBuf },
    /// Decide a query over the ABox extensions whose probability is in range.
    ProbQuery {
        kb: PathBuf,
        query: String,
        #[arg(long)]
        min: Option<String>,
        #[arg(long)]
        max: Option<String>,
        /// Shorthand for `--min P --max 1`.
        #[arg(long, conflicts_with = "min")]
        prob: Option<String>,
    },
    /// Probability that a query holds.
    ProbOf { kb: PathBuf, query: String },
    /// Combine a HEAD and a MODIFIER concept.
    Combine {
        kb: PathBuf,
        #[arg(long)]
        head: String,
        #[arg(long)]
        modifier: String,
        /// Write the revised knowledge base here.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long)]
        no_role_saturation: bool,
    },
    /// Decide a query by enumerating small ranked models.
    Oracle {
        kb: PathBuf,
        query: String,
        #[arg(long, default_value_t = 4)]
        domain_bound: usize,
        /// Look for any countermodel instead of minimal canonical ones.
        #[arg(long)]
        monotonic: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Query { .. } => "query",
            Command::Rank { .. } => "rank",
            Command::ProbQuery { .. } => "prob-query",
            Command::ProbOf { .. } => "prob-of",
            Command::Combine { .. } => "combine",
            Command::Oracle { .. } => "oracle",
        }
    }
}

/// Result of one invocation.
struct Outcome {
    result: &'static str,
    code: u8,
    fields: Map<String, Value>,
    lines: Vec<String>,
}

impl Outcome {
    fn new(result: &'static str, code: u8) -> Self {
        Outcome { result, code, fields: Map::new(), lines: Vec::new() }
    }

    fn verdict(entailed: bool) -> Self {
        if entailed {
            Outcome::new("entailed", 0)
        } else {
            Outcome::new("not-entailed", 1)
        }
    }

    fn field(mut self, key: &str, v: Value) -> Self {
        self.fields.insert(key.to_string(), v);
        self
    }

    fn line(mut self, s: impl Into<String>) -> Self {
        self.lines.push(s.into());
        self
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
    Usage(String),
    Undecided(String),
    Timeout(f64),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Core(Error::Parse(_) | Error::Dialect { .. }) => "parse",
            Failure::Core(Error::Inconsistent) => "inconsistent",
            Failure::Core(Error::GuardExceeded { .. }) => "guard",
            Failure::Core(_) => "reasoning",
            Failure::Io(_) => "io",
            Failure::Usage(_) => "usage",
            Failure::Undecided(_) => "undecided",
            Failure::Timeout(_) => "timeout",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) | Failure::Usage(m) | Failure::Undecided(m) => m.clone(),
            Failure::Timeout(secs) => format!("timed out after {secs} s"),
        }
    }
}

fn probability_json(p: &Probability) -> Value {
    json!({ "fraction": p.fraction_string(), "decimal": p.decimal_string() })
}

fn load(path: &Path) -> Result<KnowledgeBase, Failure> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Failure::Io(format!("stdin: {e}")))?
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?
    };
    Ok(parse_kb(&text)?)
}

fn probability_arg(text: &str) -> Result<Probability, Failure> {
    Probability::parse(text)
        .filter(|p| *p <= Probability::one())
        .ok_or_else(|| Failure::Usage(format!("`{text}` is not a probability in [0, 1]")))
}

fn check(kb: &KnowledgeBase) -> Outcome {
    let inconsistent = tr_entails(&kb.without_probabilities(), &Query::strict(Concept::Top, Concept::Bottom));
    if inconsistent {
        Outcome::new("inconsistent", 1)
    } else {
        Outcome::new("consistent", 0)
    }
}

fn query(
    kb: &KnowledgeBase,
    q: &Query,
    mode: Mode,
    bound: usize,
    show_base: bool,
    emit_encoding: bool,
    trace: bool,
) -> Result<Outcome, Failure> {
    if kb.dialect() == Dialect::AlcTp {
        let verdict = prob_entails(kb, q, &Probability::zero(), &Probability::one())?;
        return Ok(range_outcome(verdict).field("routed", json!("prob-query")));
    }
    let plain = kb.without_probabilities();
    let mut out = match mode {
        Mode::Mono => {
            let mut out = Outcome::verdict(tr_entails(&plain, q));
            if emit_encoding {
                let text = encode(&plain).to_text();
                out = out.field("encoding", json!(text)).line(text.trim_end().to_string());
            }
            out
        }
        Mode::Rc => Outcome::verdict(rc_entails(&plain, q)?),
        Mode::Sc => {
            let mut out = Outcome::verdict(sc_entails(&plain, q)?);
            if show_base {
                let Query::Inclusion { left: LeftConcept::Typical(b), .. } = q else {
                    return Err(Failure::Usage("--show-base needs a query of the form T(B) <= D".into()));
                };
                let base = build_base(&plain, b)?;
                let accepted: Vec<Value> =
                    base.accepted.iter().map(|(r, d)| json!({ "rank": r, "defaults": d.iter().map(|i| i + 1).collect::<Vec<_>>() })).collect();
                out = out
                    .field("base", json!({ "target": b.to_string(), "accepted": accepted, "stop_rank": base.stop_rank }))
                    .line(base.describe(&plain).trim_end().to_string());
            }
            out
        }
        Mode::Oracle => match oracle_min_canonical_entails(&plain, q, bound)? {
            CanonicalVerdict::Entailed => Outcome::verdict(true),
            CanonicalVerdict::NotEntailed(m) => {
                let out = Outcome::verdict(false);
                if trace {
                    out.field("countermodel", json!(m.to_string())).line(m.to_string().trim_end().to_string())
                } else {
                    out
                }
            }
            CanonicalVerdict::NoCanonicalModel { types } => {
                return Err(Failure::Undecided(format!(
                    "no canonical model within domain bound {bound} ({types} consistent types)"
                )))
            }
        },
    };
    out = out.field("mode", json!(mode.name()));
    Ok(out)
}

fn range_outcome(v: RangeVerdict) -> Outcome {
    match v {
        RangeVerdict::Entailed => Outcome::new("entailed", 0),
        RangeVerdict::NotEntailed => Outcome::new("not-entailed", 1),
        RangeVerdict::Vacuous => Outcome::new("vacuous", 1),
    }
}

fn rank(kb: &KnowledgeBase) -> Outcome {
    let ranking = compute_ranking(&kb.without_probabilities());
    let mut out = Outcome::new("ok", 0);
    let levels: Vec<Vec<usize>> =
        ranking.level_indices().iter().map(|l| l.iter().map(|i| i + 1).collect()).collect();
    let mut defaults = Vec::new();
    for (i, d) in kb.defeasible().iter().enumerate() {
        let r = ranking.default_rank(i);
        let shown = r.map_or("inf".to_string(), |r| r.to_string());
        out = out.line(format!("[{}] rank {shown}: {d}", i + 1));
        defaults.push(json!({ "index": i + 1, "inclusion": d.to_string(), "rank": r }));
    }
    for (i, l) in levels.iter().enumerate() {
        out = out.line(format!("E_{i} = {l:?}"));
    }
    let absurd: Vec<String> = ranking.absurd().iter().map(|c| c.to_string()).collect();
    for c in &absurd {
        out = out.line(format!("{c} has no typical instances"));
    }
    out.field("levels", json!(levels)).field("defaults", json!(defaults)).field("absurd", json!(absurd))
}

fn prob_query(kb: &KnowledgeBase, q: &Query, min: Probability, max: Probability, trace: bool) -> Result<Outcome, Failure> {
    let verdict = prob_entails(kb, q, &min, &max)?;
    let mut out = range_outcome(verdict)
        .field("min", probability_json(&min))
        .field("max", probability_json(&max));
    if trace && !matches!(q, Query::Inclusion { .. }) {
        let extensions = enumerate_extensions(&build_index(kb)?)?;
        let in_range: Vec<String> = extensions
            .iter()
            .filter(|e| e.probability >= min && e.probability <= max)
            .map(|e| e.to_string())
            .collect();
        for e in &in_range {
            out = out.line(e.clone());
        }
        out = out.field("extensions", json!(in_range));
    }
    Ok(out)
}

fn prob_of(kb: &KnowledgeBase, q: &Query, query_text: &str, trace: bool) -> Result<Outcome, Failure> {
    let p = query_probability(kb, q)?;
    let mut out = Outcome::new("ok", 0)
        .field("probability", probability_json(&p))
        .line(format!("P({query_text}) = {} ({})", p.fraction_string(), p.decimal_string()));
    if trace {
        let extensions: Vec<String> = enumerate_extensions(&build_index(kb)?)?.iter().map(|e| e.to_string()).collect();
        for e in &extensions {
            out = out.line(e.clone());
        }
        out = out.field("extensions", json!(extensions));
    }
    Ok(out)
}

fn combine(
    kb: &KnowledgeBase,
    head: &str,
    modifier: &str,
    emit: Option<&Path>,
    role_saturation: bool,
    trace: bool,
) -> Result<Outcome, Failure> {
    let head = parse_concept(head)?;
    let modifier = parse_concept(modifier)?;
    let opts = CombineOptions { role_saturation, ..CombineOptions::default() };
    let r = match revise(kb, &head, &modifier, opts) {
        Ok(r) => r,
        Err(Error::CombinationFailure) => {
            return Ok(Outcome::new("combination-failure", 1).line("no scenario survives the selection"));
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = Outcome::new("ok", 0);
    if trace {
        let mut blocks = Vec::new();
        for b in &r.trace {
            out = out.line(format!("block P = {}", b.probability));
            let mut entries = Vec::new();
            for (w, v) in &b.entries {
                out = out.line(format!("  {w} {v}"));
                entries.push(json!({ "selection": w.to_string(), "verdict": v.to_string() }));
            }
            blocks.push(json!({ "probability": probability_json(&b.probability), "scenarios": entries }));
        }
        out = out.field("trace", json!(blocks));
    }
    for w in &r.selected {
        out = out.line(format!("selected {w} P = {}", w.probability));
    }
    let additions: Vec<String> = r.additions.iter().map(|i| i.to_string()).collect();
    for a in &additions {
        out = out.line(format!("{a}."));
    }
    let selected: Vec<Value> = r
        .selected
        .iter()
        .map(|w| json!({ "selection": w.to_string(), "probability": probability_json(&w.probability) }))
        .collect();
    out = out
        .field("compound", json!(r.compound.to_string()))
        .field("selected", json!(selected))
        .field("additions", json!(additions));
    if let Some(path) = emit {
        std::fs::write(path, serialize_kb(&r.revised)).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        out = out.field("emitted", json!(path.display().to_string()));
    }
    Ok(out)
}

fn oracle(kb: &KnowledgeBase, q: &Query, bound: usize, monotonic: bool, trace: bool) -> Result<Outcome, Failure> {
    let plain = kb.without_probabilities();
    let (out, model) = if monotonic {
        match oracle_entails(&plain, q, bound)? {
            OracleVerdict::NoCountermodel => (Outcome::verdict(true), None),
            OracleVerdict::Countermodel(m) => (Outcome::verdict(false), Some(m)),
        }
    } else {
        match oracle_min_canonical_entails(&plain, q, bound)? {
            CanonicalVerdict::Entailed => (Outcome::verdict(true), None),
            CanonicalVerdict::NotEntailed(m) => (Outcome::verdict(false), Some(m)),
            CanonicalVerdict::NoCanonicalModel { types } => {
                return Err(Failure::Undecided(format!(
                    "no canonical model within domain bound {bound} ({types} consistent types)"
                )))
            }
        }
    };
    let mut out = out
        .field("domain_bound", json!(bound))
        .field("semantics", json!(if monotonic { "ranked" } else { "minimal-canonical" }));
    if let (Some(m), true) = (model, trace) {
        out = out.field("countermodel", json!(m.to_string())).line(m.to_string().trim_end().to_string());
    }
    Ok(out)
}

fn run(command: &Command, trace: bool) -> Result<Outcome, Failure> {
    match command {
        Command::Check { kb } => Ok(check(&load(kb)?)),
        Command::Query { kb, query: text, mode, domain_bound, show_base, emit_encoding } => {
            let kb = load(kb)?;
            let q = parse_query(text)?;
            query(&kb, &q, *mode, *domain_bound, *show_base, *emit_encoding, trace)
        }
        Command::Rank { kb } => Ok(rank(&load(kb)?)),
        Command::ProbQuery { kb, query: text, min, max, prob } => {
            let kb = load(kb)?;
            let q = parse_query(text)?;
            let lo = match (prob, min) {
                (Some(p), _) | (None, Some(p)) => probability_arg(p)?,
                (None, None) => Probability::zero(),
            };
            let hi = max.as_deref().map(probability_arg).transpose()?.unwrap_or_else(Probability::one);
            prob_query(&kb, &q, lo, hi, trace)
        }
        Command::ProbOf { kb, query: text } => {
            let kb = load(kb)?;
            prob_of(&kb, &parse_query(text)?, text.trim(), trace)
        }
        Command::Combine { kb, head, modifier, emit, no_role_saturation } => {
            combine(&load(kb)?, head, modifier, emit.as_deref(), !no_role_saturation, trace)
        }
        Command::Oracle { kb, query: text, domain_bound, monotonic } => {
            let kb = load(kb)?;
            oracle(&kb, &parse_query(text)?, *domain_bound, *monotonic, trace)
        }
    }
}

fn query_text(command: &Command) -> Option<&str> {
    match command {
        Command::Query { query, .. }
        | Command::ProbQuery { query, .. }
        | Command::ProbOf { query, .. }
        | Command::Oracle { query, .. } => Some(query.trim()),
        _ => None,
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn report(cli: &Cli, outcome: Result<Outcome, Failure>) -> ExitCode {
    let mut obj = Map::new();
    obj.insert("schema".into(), json!(SCHEMA));
    obj.insert("command".into(), json!(cli.command.name()));
    if let Some(q) = query_text(&cli.command) {
        obj.insert("query".into(), json!(q));
    }
    let code = match outcome {
        Ok(out) => {
            obj.insert("result".into(), json!(out.result));
            obj.extend(out.fields);
            if !cli.json {
                let mut text = String::new();
                match query_text(&cli.command) {
                    Some(q) if out.result != "ok" => text.push_str(&format!("{}: {q}\n", out.result)),
                    _ if out.result != "ok" => text.push_str(&format!("{}\n", out.result)),
                    _ => {}
                }
                for l in &out.lines {
                    text.push_str(l);
                    text.push('\n');
                }
                emit(&text);
            }
            out.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            obj.insert("result".into(), json!("error"));
            obj.insert("error".into(), json!({ "kind": f.kind(), "message": f.message() }));
            2
        }
    };
    if cli.json {
        emit(&format!("{}\n", Value::Object(obj)));
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(secs) = cli.timeout else {
        let outcome = run(&cli.command, cli.trace);
        return report(&cli, outcome);
    };
    if !(secs.is_finite() && secs > 0.0) {
        return report(&cli, Err(Failure::Usage(format!("invalid timeout {secs}"))));
    }
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|s| {
        s.spawn(|| {
            let _ = tx.send(run(&cli.command, cli.trace));
        });
        match rx.recv_timeout(Duration::from_secs_f64(secs)) {
            Ok(outcome) => report(&cli, outcome),
            Err(_) => {
                report(&cli, Err(Failure::Timeout(secs)));
                // The worker cannot be interrupted; leave without joining it.
                std::process::exit(2);
            }
        }
    })
}
