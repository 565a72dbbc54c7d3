//! `valchain`: exact valuations on Q[X] from the command line.
//!
//! Reads chain documents (`valuation-chain/1`) and sequence documents
//! (`key-sequence/1`), evaluates and truncates them on polynomials,
//! converts between the two representations, checks the structural axioms,
//! classifies the defined valuation, and walks through built-in demo
//! systems with embedded self-checks.
//!
//! Exit status: 0 on success, 1 when validation fails or the data does not
//! determine a value (unresolved or unstable scans), 2 on malformed input.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use valchain::chains::{classify, Chain, ChainError, Sequence};
use valchain::format;
use valchain::keypoly;
use valchain::scenarios::{self, ScenarioKind};
use valchain::{GroupValue, Poly};

/// Schema marker on every structured report.
const REPORT_SCHEMA: &str = "valchain-report/1";

/// Inspection depth when neither `--depth` nor `VALCHAIN_DEPTH` is given.
const DEFAULT_DEPTH: usize = 8;

// ====== Command line ======

#[derive(Parser)]
#[command(
    name = "valchain",
    version,
    about = "Exact valuations on Q[X]: augmentation chains and key-polynomial sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the valuation on a polynomial and print the value
    Eval {
        #[command(flatten)]
        input: InputArgs,
        /// Polynomial to evaluate, e.g. "X^2 + 2"
        #[arg(long)]
        poly: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate the truncation by a key polynomial Q
    Truncate {
        #[command(flatten)]
        input: InputArgs,
        /// Truncation key Q
        #[arg(long)]
        q: String,
        /// Polynomial to evaluate
        #[arg(long)]
        poly: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Convert between the chain and sequence representations
    Convert {
        #[command(flatten)]
        input: InputArgs,
        /// Target representation
        #[arg(long, value_enum)]
        to: Target,
        /// Write the converted document here instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check the structural axioms and print a findings report
    Validate {
        #[command(flatten)]
        input: InputArgs,
        /// Seed for the sampled cross-checks
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classify the valuation from the sequence shape
    Classify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a built-in demo system with self-checks (no name: list them)
    Demo {
        /// Demo name, e.g. "sqrt7"
        name: Option<String>,
        /// Seed for the sampled cross-checks
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Read a chain document (valuation-chain/1)
    #[arg(long, value_name = "FILE")]
    chain: Option<PathBuf>,
    /// Read a sequence document (key-sequence/1)
    #[arg(long, value_name = "FILE")]
    sequence: Option<PathBuf>,
}

#[derive(Args)]
struct CommonArgs {
    /// Inspection depth for validation, conversion, and classification
    /// (default: VALCHAIN_DEPTH or 8)
    #[arg(long)]
    depth: Option<usize>,
    /// Override the stability scan window of every family
    #[arg(long)]
    window: Option<usize>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    /// Human-readable report
    Text,
    /// Structured report under the valchain-report/1 schema
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Chain,
    Sequence,
}

// ====== Outcomes ======

struct Outcome {
    stdout: String,
    code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { stdout, code: 0 }
    }
}

enum Failure {
    /// Exit 2: the request or an input file is malformed.
    Input(String),
    /// Exit 1: well-formed data that fails validation or does not
    /// determine a value.
    Domain(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        match self {
            Failure::Input(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            Failure::Domain(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        }
    }
}

fn domain(e: ChainError) -> Failure {
    Failure::Domain(e.to_string())
}

// ====== Shared plumbing ======

enum Rep {
    Chain(Chain),
    Sequence(Sequence),
}

impl Rep {
    fn kind_str(&self) -> &'static str {
        match self {
            Rep::Chain(_) => "chain",
            Rep::Sequence(_) => "sequence",
        }
    }

    fn value(&self, f: &Poly) -> Result<GroupValue, ChainError> {
        match self {
            Rep::Chain(ch) => ch.value(f),
            Rep::Sequence(seq) => seq.value(f),
        }
    }

    fn truncate(&self, q: &Poly, f: &Poly) -> Result<GroupValue, ChainError> {
        match self {
            Rep::Chain(ch) => ch.truncate(q, f),
            Rep::Sequence(seq) => seq.truncate(q, f),
        }
    }
}

fn load(input: &InputArgs, window: Option<usize>) -> Result<Rep, Failure> {
    let (path, is_chain) = match (&input.chain, &input.sequence) {
        (Some(p), None) => (p, true),
        (None, Some(p)) => (p, false),
        _ => unreachable!("clap enforces exactly one input"),
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let place = |e: format::FormatError| Failure::Input(format!("{}: {e}", path.display()));
    if is_chain {
        let ch = format::read_chain(&text).map_err(place)?;
        Ok(Rep::Chain(match window {
            Some(w) => ch.with_family_windows(w),
            None => ch,
        }))
    } else {
        let seq = format::read_sequence(&text).map_err(place)?;
        Ok(Rep::Sequence(match window {
            Some(w) => seq.with_family_windows(w),
            None => seq,
        }))
    }
}

fn parse_poly(flag: &str, text: &str) -> Result<Poly, Failure> {
    text.parse::<Poly>()
        .map_err(|e| Failure::Input(format!("{flag} {text:?}: {e}")))
}

fn depth_of(common: &CommonArgs) -> Result<usize, Failure> {
    if let Some(d) = common.depth {
        return Ok(d);
    }
    match std::env::var("VALCHAIN_DEPTH") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("VALCHAIN_DEPTH={s:?} is not a depth"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_DEPTH),
        Err(e) => Err(Failure::Input(format!("VALCHAIN_DEPTH: {e}"))),
    }
}

fn json_text(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("report serializes");
    s.push('\n');
    s
}

// ====== Subcommands ======

fn run(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Eval { input, poly, common } => run_eval(input, poly, common),
        Command::Truncate { input, q, poly, common } => run_truncate(input, q, poly, common),
        Command::Convert { input, to, out, common } => run_convert(input, to, out, common),
        Command::Validate { input, seed, common } => run_validate(input, seed, common),
        Command::Classify { input, common } => run_classify(input, common),
        Command::Demo { name, seed, common } => run_demo(name, seed, common),
    }
}

fn run_eval(input: InputArgs, poly: String, common: CommonArgs) -> Result<Outcome, Failure> {
    let rep = load(&input, common.window)?;
    let f = parse_poly("--poly", &poly)?;
    let v = rep.value(&f).map_err(domain)?;
    Ok(Outcome::ok(match common.format {
        Format::Text => format!("{v}\n"),
        Format::Json => json_text(json!({
            "schema": REPORT_SCHEMA,
            "command": "eval",
            "input": rep.kind_str(),
            "poly": f.to_string(),
            "value": v.to_string(),
        })),
    }))
}

fn run_truncate(
    input: InputArgs,
    q: String,
    poly: String,
    common: CommonArgs,
) -> Result<Outcome, Failure> {
    let rep = load(&input, common.window)?;
    let q = parse_poly("--q", &q)?;
    let f = parse_poly("--poly", &poly)?;
    let v = rep.truncate(&q, &f).map_err(domain)?;
    Ok(Outcome::ok(match common.format {
        Format::Text => format!("{v}\n"),
        Format::Json => json_text(json!({
            "schema": REPORT_SCHEMA,
            "command": "truncate",
            "input": rep.kind_str(),
            "q": q.to_string(),
            "poly": f.to_string(),
            "value": v.to_string(),
        })),
    }))
}

fn run_convert(
    input: InputArgs,
    to: Target,
    out: Option<PathBuf>,
    common: CommonArgs,
) -> Result<Outcome, Failure> {
    let depth = depth_of(&common)?;
    let rep = load(&input, common.window)?;
    let written = |e: format::FormatError| Failure::Domain(e.to_string());
    let text = match (rep, to) {
        (Rep::Chain(ch), Target::Sequence) => {
            format::write_sequence(&ch.to_sequence(depth).map_err(domain)?).map_err(written)?
        }
        (Rep::Sequence(seq), Target::Chain) => {
            format::write_chain(&seq.to_chain(depth).map_err(domain)?).map_err(written)?
        }
        // Same-representation targets just normalize the document.
        (Rep::Chain(ch), Target::Chain) => format::write_chain(&ch).map_err(written)?,
        (Rep::Sequence(seq), Target::Sequence) => {
            format::write_sequence(&seq).map_err(written)?
        }
    };
    match out {
        Some(path) => {
            fs::write(&path, &text)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            Ok(Outcome::ok(String::new()))
        }
        None => Ok(Outcome::ok(text)),
    }
}

fn run_validate(input: InputArgs, seed: u64, common: CommonArgs) -> Result<Outcome, Failure> {
    let depth = depth_of(&common)?;
    let rep = load(&input, common.window)?;
    let report = match &rep {
        Rep::Chain(ch) => {
            let candidates = keypoly::sample_polys(ch.field(), 8, 4, seed);
            ch.validate(depth, &candidates)
        }
        Rep::Sequence(seq) => seq.validate(depth),
    };
    let stdout = match common.format {
        Format::Text => report.to_string(),
        Format::Json => json_text(json!({
            "schema": REPORT_SCHEMA,
            "command": "validate",
            "input": rep.kind_str(),
            "status": report.status(),
            "inspected_depth": report.inspected_depth,
            "findings": report
                .findings
                .iter()
                .map(|f| json!({
                    "axiom": f.axiom,
                    "location": f.location,
                    "detail": f.detail,
                }))
                .collect::<Vec<_>>(),
        })),
    };
    Ok(Outcome { stdout, code: if report.passed() { 0 } else { 1 } })
}

fn run_classify(input: InputArgs, common: CommonArgs) -> Result<Outcome, Failure> {
    let depth = depth_of(&common)?;
    let rep = load(&input, common.window)?;
    let seq = match rep {
        Rep::Sequence(seq) => seq,
        Rep::Chain(ch) => ch.to_sequence(depth).map_err(domain)?,
    };
    let verdict = classify(&seq, depth);
    Ok(Outcome::ok(match common.format {
        Format::Text => format!("{verdict}\n"),
        Format::Json => json_text(json!({
            "schema": REPORT_SCHEMA,
            "command": "classify",
            "classification": verdict.to_string(),
            "shape": seq.shape().to_string(),
            "depth": depth,
        })),
    }))
}

// ====== Demos ======

struct Check {
    label: String,
    pass: bool,
}

fn parse_literal(s: &str) -> Poly {
    s.parse().expect("builtin literal")
}

fn check_value_poly(
    checks: &mut Vec<Check>,
    rep: &Rep,
    label: &str,
    f: &Poly,
    expected: &str,
) -> Result<(), Failure> {
    let got = rep.value(f).map_err(domain)?;
    checks.push(Check {
        label: format!("w({label}) = {expected}"),
        pass: got.to_string() == expected,
    });
    Ok(())
}

fn check_value(
    checks: &mut Vec<Check>,
    rep: &Rep,
    poly_s: &str,
    expected: &str,
) -> Result<(), Failure> {
    let f = parse_literal(poly_s);
    check_value_poly(checks, rep, poly_s, &f, expected)
}

fn check_truncate(
    checks: &mut Vec<Check>,
    rep: &Rep,
    q_s: &str,
    poly_s: &str,
    expected: &str,
) -> Result<(), Failure> {
    let got = rep.truncate(&parse_literal(q_s), &parse_literal(poly_s)).map_err(domain)?;
    checks.push(Check {
        label: format!("truncation by {q_s} of {poly_s} = {expected}"),
        pass: got.to_string() == expected,
    });
    Ok(())
}

fn run_demo(name: Option<String>, seed: u64, common: CommonArgs) -> Result<Outcome, Failure> {
    let Some(name) = name else {
        return Ok(list_demos(common.format));
    };
    let Some(scenario) = scenarios::by_name(&name) else {
        let names: Vec<&str> = scenarios::all().iter().map(|s| s.name).collect();
        return Err(Failure::Input(format!(
            "unknown demo {name:?}; available: {}",
            names.join(", ")
        )));
    };
    let depth = depth_of(&common)?;
    let rep = match scenario.kind {
        ScenarioKind::Chain(ch) => Rep::Chain(match common.window {
            Some(w) => ch.with_family_windows(w),
            None => ch,
        }),
        ScenarioKind::Sequence(seq) => Rep::Sequence(match common.window {
            Some(w) => seq.with_family_windows(w),
            None => seq,
        }),
    };

    let mut lines: Vec<String> = Vec::new();
    let mut checks: Vec<Check> = Vec::new();
    lines.push(format!("demo {}: {}", scenario.name, scenario.summary));
    lines.push(match &rep {
        Rep::Chain(ch) => ch.to_string(),
        Rep::Sequence(seq) => seq.to_string(),
    });
    demo_narrative(scenario.name, &rep, depth, &mut lines, &mut checks)?;

    // Structural self-check with seeded probe candidates.
    let report = match &rep {
        Rep::Chain(ch) => ch.validate(depth, &keypoly::sample_polys(ch.field(), 6, 3, seed)),
        Rep::Sequence(seq) => seq.validate(depth),
    };
    checks.push(Check {
        label: format!("structural validation at depth {depth}"),
        pass: report.passed(),
    });

    // Classification goes through the sequence form, as the dichotomy is
    // stated for sequences.
    let seq = match &rep {
        Rep::Sequence(seq) => seq.clone(),
        Rep::Chain(ch) => ch.to_sequence(depth).map_err(domain)?,
    };
    let verdict = classify(&seq, depth).to_string();
    let expected_verdict = match scenario.name {
        "two-step" | "sqrt7" | "depth-zero" => "valuation-transcendental".to_string(),
        "liouville" | "tower" | "aperiodic" => "valuation-algebraic".to_string(),
        _ => format!("undetermined at depth {depth}"),
    };
    checks.push(Check {
        label: format!("classification is {expected_verdict}"),
        pass: verdict == expected_verdict,
    });
    let verdict_line = if scenario.name == "sqrt7" {
        format!("classification: {verdict} after limit augmentation")
    } else {
        format!("classification: {verdict}")
    };

    let all_pass = checks.iter().all(|c| c.pass);
    let code = u8::from(!all_pass);
    let stdout = match common.format {
        Format::Text => {
            let mut out = String::new();
            for line in &lines {
                out.push_str(line);
                if !line.ends_with('\n') {
                    out.push('\n');
                }
            }
            for check in &checks {
                out.push_str(&format!(
                    "check {}: {}\n",
                    check.label,
                    if check.pass { "PASS" } else { "FAIL" }
                ));
            }
            out.push_str(&verdict_line);
            out.push('\n');
            out
        }
        Format::Json => json_text(json!({
            "schema": REPORT_SCHEMA,
            "command": "demo",
            "name": scenario.name,
            "depth": depth,
            "lines": lines,
            "checks": checks
                .iter()
                .map(|c| json!({ "label": c.label, "pass": c.pass }))
                .collect::<Vec<_>>(),
            "classification": verdict,
        })),
    };
    Ok(Outcome { stdout, code })
}

fn list_demos(format: Format) -> Outcome {
    let all = scenarios::all();
    let stdout = match format {
        Format::Text => {
            let mut out = String::new();
            for s in &all {
                out.push_str(&format!("{:<12} {}\n", s.name, s.summary));
            }
            out
        }
        Format::Json => json_text(json!({
            "schema": REPORT_SCHEMA,
            "command": "demo",
            "scenarios": all
                .iter()
                .map(|s| json!({ "name": s.name, "summary": s.summary }))
                .collect::<Vec<_>>(),
        })),
    };
    Outcome::ok(stdout)
}

fn demo_narrative(
    name: &str,
    rep: &Rep,
    depth: usize,
    lines: &mut Vec<String>,
    checks: &mut Vec<Check>,
) -> Result<(), Failure> {
    match name {
        "two-step" => {
            lines.push(
                "two stacked augmentations, each doubling the ramification: \
                 w(X) = 1/2, then w(X^2 - 2) = 3/2"
                    .into(),
            );
            check_value(checks, rep, "X^2 + 2", "3/2")?;
            check_value(checks, rep, "X", "1/2")?;
            check_value(checks, rep, "X^2 - 2", "3/2")?;
            check_truncate(checks, rep, "X", "X^2 + 2", "1")?;
        }
        "sqrt7" => {
            let Rep::Chain(ch) = rep else { unreachable!("sqrt7 is a chain") };
            let target = parse_literal("X^2 - 7");
            let samples = ch.family_values(0, &target, 6).map_err(domain)?;
            let shown: Vec<String> = samples.iter().map(|(_, v)| v.to_string()).collect();
            lines.push(format!(
                "the family never settles on X^2 - 7: unstable at degree 2, \
                 values {} ...",
                shown.join(", ")
            ));
            lines.push("limit key polynomial X^2 - 7, pinned at value 50".into());
            let rising = samples.windows(2).all(|w| w[0].1 < w[1].1);
            checks.push(Check {
                label: "values of X^2 - 7 along the family strictly rise".into(),
                pass: rising && samples.len() >= 4,
            });
            check_value(checks, rep, "X - 1", "1")?;
            check_value(checks, rep, "X - 4", "2")?;
            check_value(checks, rep, "X^2 - 7", "50")?;
        }
        "liouville" => {
            lines.push(
                "the factorial gaps freeze every polynomial along the family; \
                 the chain ends in a stable limit instead of another augmentation"
                    .into(),
            );
            check_value(checks, rep, "X - 3", "2")?;
            check_value(checks, rep, "X - 12", "6")?;
            check_value(checks, rep, "X^2 - 7", "0")?;
        }
        "tower" => {
            lines.push(
                "keys double in degree forever: X^2 - 2, (X^2 - 2)^2 - 4X, ...; \
                 values 5/4, 21/8, 85/16, ... each extend the value group by index 2"
                    .into(),
            );
            let phi1 = parse_literal("X^2 - 2");
            let phi2 = phi1.pow(2).sub(&parse_literal("4*X"));
            let phi3 = phi2.pow(2).sub(&phi1.mul(&parse_literal("16")));
            check_value_poly(checks, rep, "key 1", &phi1, "5/4")?;
            check_value_poly(checks, rep, "key 2", &phi2, "21/8")?;
            check_value_poly(checks, rep, "key 3", &phi3, "85/16")?;
        }
        "aperiodic" => {
            lines.push(
                "digit 2 at the perfect-square positions, 1 elsewhere: the \
                 stream carries no freezing certificate, so stability is \
                 judged through the scan window"
                    .into(),
            );
            check_value(checks, rep, "X", "1")?;
            check_value(checks, rep, "X - 6", "2")?;
        }
        "depth-zero" => {
            lines.push(
                "the bare seed already defines a valuation: the minimum of \
                 v(c_i) + 3i over the Taylor coefficients at 2"
                    .into(),
            );
            check_value(checks, rep, "X - 2", "3")?;
            check_value(checks, rep, "X", "0")?;
            check_value(checks, rep, "X - 7", "1")?;
        }
        "undeclared" => {
            lines.push(format!(
                "the block list never declares an end; inspection stops at \
                 depth {depth} without a verdict, and a deeper --depth only \
                 moves the frontier"
            ));
        }
        _ => {}
    }
    Ok(())
}

// ====== Entry point ======

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(failure) => failure.exit(),
    }
}
