//! Thin command-line front end over the library. All verdict logic lives in
//! the library modules; this binary parses arguments, loads inputs, and
//! renders results as text or a JSON run report.
//!
//! Exit codes: 0 satisfied or solution found, 1 unsatisfied or no solution,
//! 2 usage or input error (the diagnostic names the failing stage).

use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flowck::checker::{check_with, synthesize_with, CheckError, CheckOptions, Engine, Verdict};
use flowck::flow::FlowData;
use flowck::formula::StateFormula;
use flowck::maxflow::max_flow;
use flowck::network::{parse_network, validate, FlowNetwork, NetworkData};
use flowck::query::{
    classify_prop_query, classify_value_query, strongest_prop_solutions,
    strongest_value_solution,
};
use flowck::report::{Payload, PropSolutionData, RunReport, ValueSolutionData};

#[derive(Parser)]
#[command(name = "flowck", version, about = "Model checking and queries over capacitated flow networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Emit a JSON run report on stdout instead of text
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a network file against the format's invariants
    Validate(NetArgs),
    /// Maximum flow value with a witness flow
    Maxflow(NetArgs),
    /// Decide whether a formula holds at the network's source
    Check(FormulaArgs),
    /// Produce a satisfying flow for an existential flow formula
    Synth(FormulaArgs),
    /// Strongest threshold for a formula with one `>= ?`-style hole
    QueryValue(FormulaArgs),
    /// Strongest assertions for a formula with one `?` hole
    QueryProp(QueryPropArgs),
}

#[derive(Args)]
struct NetArgs {
    /// Network description (JSON)
    #[arg(long)]
    network: String,
}

#[derive(Args)]
struct FormulaArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Formula text
    #[arg(long, conflicts_with = "formula_file", required_unless_present = "formula_file")]
    formula: Option<String>,
    /// File containing the formula text
    #[arg(long)]
    formula_file: Option<String>,
    /// Checking engine; `oracle` cross-checks the automatic engine against
    /// the brute-force reference and refuses on disagreement
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    engine: EngineArg,
}

#[derive(Args)]
struct QueryPropArgs {
    #[command(flatten)]
    formula: FormulaArgs,
    /// Refuse networks with more atomic propositions than this
    #[arg(long, default_value_t = 3)]
    ap_limit: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    General,
    Cbfl,
    Oracle,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Auto => Engine::Auto,
            EngineArg::General => Engine::General,
            EngineArg::Cbfl => Engine::Cbfl,
            EngineArg::Oracle => Engine::Oracle,
        }
    }
}

/// Input or classification failure: exits with code 2, naming the stage.
struct Failure {
    stage: &'static str,
    message: String,
}

impl Failure {
    fn new(stage: &'static str, message: impl ToString) -> Failure {
        Failure { stage, message: message.to_string() }
    }
}

struct Outcome {
    /// 0 for a positive verdict, 1 for a negative one.
    code: u8,
    payload: Payload,
    text: String,
    warnings: Vec<String>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = match &cli.cmd {
        Cmd::Validate(a) => cmd_validate(a),
        Cmd::Maxflow(a) => cmd_maxflow(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::QueryValue(a) => cmd_query_value(a),
        Cmd::QueryProp(a) => cmd_query_prop(a),
    };
    match outcome {
        Ok(out) => {
            if cli.json {
                let mut report =
                    RunReport::new(argv, start.elapsed().as_millis() as u64, out.payload);
                report.warnings = out.warnings;
                let mut text =
                    serde_json::to_string_pretty(&report).expect("report serializes");
                text.push('\n');
                emit(&text);
            } else {
                emit(&out.text);
                for w in &out.warnings {
                    eprintln!("note: {w}");
                }
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error ({}): {}", f.stage, f.message);
            ExitCode::from(2)
        }
    }
}

/// Write to stdout, treating a closed pipe as a normal early exit rather
/// than a panic.
fn emit(text: &str) {
    use std::io::Write;
    if std::io::stdout().write_all(text.as_bytes()).is_err() {
        std::process::exit(0);
    }
}

fn load_network_data(path: &str) -> Result<NetworkData, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new("read network", format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Failure::new("parse network", e))
}

fn load_network(path: &str) -> Result<FlowNetwork, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new("read network", format!("{path}: {e}")))?;
    parse_network(&text).map_err(|e| Failure::new("validate network", e))
}

fn load_formula(a: &FormulaArgs) -> Result<StateFormula, Failure> {
    let text = match (&a.formula, &a.formula_file) {
        (Some(t), None) => t.clone(),
        (None, Some(path)) => fs::read_to_string(path)
            .map_err(|e| Failure::new("read formula", format!("{path}: {e}")))?,
        _ => unreachable!("clap enforces exactly one formula source"),
    };
    StateFormula::parse(text.trim()).map_err(|e| Failure::new("parse formula", e))
}

fn check_failure(e: CheckError) -> Failure {
    let stage = match e {
        CheckError::NotClosed(_)
        | CheckError::NotConjunctive(_)
        | CheckError::NonConstantThreshold(_)
        | CheckError::UnsupportedNesting(_)
        | CheckError::NotExistentialBfl1(_) => "classify",
        _ => "check",
    };
    Failure::new(stage, e)
}

fn render_flow(text: &mut String, flow: &FlowData) {
    for e in &flow.edges {
        writeln!(text, "  {} -> {}: {}", e.from, e.to, e.flow).expect("string write");
    }
}

fn cmd_validate(a: &NetArgs) -> Result<Outcome, Failure> {
    let data = load_network_data(&a.network)?;
    let violations: Vec<String> = validate(&data).iter().map(|v| v.to_string()).collect();
    let mut text = String::new();
    if violations.is_empty() {
        writeln!(text, "ok: {} satisfies the network invariants", a.network).expect("string write");
    } else {
        for v in &violations {
            writeln!(text, "violation: {v}").expect("string write");
        }
    }
    let code = if violations.is_empty() { 0 } else { 1 };
    Ok(Outcome { code, payload: Payload::Validate { violations }, text, warnings: Vec::new() })
}

fn cmd_maxflow(a: &NetArgs) -> Result<Outcome, Failure> {
    let net = load_network(&a.network)?;
    let (value, flow) = max_flow(&net);
    let witness = flow.to_data(&net);
    let mut text = String::new();
    writeln!(text, "max flow {value}").expect("string write");
    render_flow(&mut text, &witness);
    Ok(Outcome { code: 0, payload: Payload::Maxflow { value, witness }, text, warnings: Vec::new() })
}

fn run_check(net: &FlowNetwork, f: &StateFormula, engine: EngineArg) -> Result<Verdict, Failure> {
    let opts = CheckOptions { engine: engine.into(), ..CheckOptions::default() };
    let verdict = check_with(net, f, &opts).map_err(check_failure)?;
    if matches!(engine, EngineArg::Oracle) {
        let auto = CheckOptions::default();
        let second = check_with(net, f, &auto).map_err(check_failure)?;
        if second.satisfied != verdict.satisfied {
            return Err(Failure::new(
                "cross-check",
                format!(
                    "engines disagree on {f}: oracle says {}, automatic engine says {}",
                    verdict.satisfied, second.satisfied
                ),
            ));
        }
    }
    Ok(verdict)
}

fn cmd_check(a: &FormulaArgs) -> Result<Outcome, Failure> {
    let net = load_network(&a.net.network)?;
    let f = load_formula(a)?;
    let verdict = run_check(&net, &f, a.engine)?;
    let witness = verdict.witness.as_ref().map(|w| w.to_data(&net));
    let engine = Engine::from(a.engine).to_string();
    let mut text = String::new();
    writeln!(text, "{}", if verdict.satisfied { "satisfied" } else { "unsatisfied" })
        .expect("string write");
    if let Some(w) = &witness {
        writeln!(text, "{}:", if verdict.satisfied { "witness" } else { "counterexample" })
            .expect("string write");
        render_flow(&mut text, w);
    }
    Ok(Outcome {
        code: if verdict.satisfied { 0 } else { 1 },
        payload: Payload::Check { satisfied: verdict.satisfied, engine, witness },
        text,
        warnings: verdict.diagnostics.iter().map(|d| format!("{}: {}", d.code, d.message)).collect(),
    })
}

fn cmd_synth(a: &FormulaArgs) -> Result<Outcome, Failure> {
    let net = load_network(&a.net.network)?;
    let f = load_formula(a)?;
    let opts = CheckOptions { engine: a.engine.into(), ..CheckOptions::default() };
    let found = synthesize_with(&net, &f, &opts).map_err(check_failure)?;
    let witness = found.as_ref().map(|w| w.to_data(&net));
    let mut text = String::new();
    match &witness {
        Some(w) => {
            writeln!(text, "witness:").expect("string write");
            render_flow(&mut text, w);
        }
        None => writeln!(text, "NONE").expect("string write"),
    }
    Ok(Outcome {
        code: if witness.is_some() { 0 } else { 1 },
        payload: Payload::Synth { found: witness.is_some(), witness },
        text,
        warnings: Vec::new(),
    })
}

fn cmd_query_value(a: &FormulaArgs) -> Result<Outcome, Failure> {
    let net = load_network(&a.net.network)?;
    let f = load_formula(a)?;
    let q = classify_value_query(&f).map_err(|e| Failure::new("classify", e))?;
    let opts = CheckOptions { engine: a.engine.into(), ..CheckOptions::default() };
    let sol = strongest_value_solution(&net, &q, &opts).map_err(|e| Failure::new("check", e))?;
    let mut text = String::new();
    let payload = match sol {
        Some(s) => {
            writeln!(text, "strongest {} (solutions {}..={})", s.strongest, s.lo, s.hi)
                .expect("string write");
            Payload::QueryValue {
                solution: Some(ValueSolutionData { strongest: s.strongest, lo: s.lo, hi: s.hi }),
            }
        }
        None => {
            writeln!(text, "no solution").expect("string write");
            Payload::QueryValue { solution: None }
        }
    };
    Ok(Outcome { code: if sol.is_some() { 0 } else { 1 }, payload, text, warnings: Vec::new() })
}

fn cmd_query_prop(a: &QueryPropArgs) -> Result<Outcome, Failure> {
    let net = load_network(&a.formula.net.network)?;
    let f = load_formula(&a.formula)?;
    let q = classify_prop_query(&f).map_err(|e| Failure::new("classify", e))?;
    let opts = CheckOptions { engine: a.formula.engine.into(), ..CheckOptions::default() };
    let sols = strongest_prop_solutions(&net, &q, a.ap_limit, &opts)
        .map_err(|e| Failure::new("check", e))?;
    let mut text = String::new();
    if sols.is_empty() {
        writeln!(text, "no solution").expect("string write");
    } else {
        for s in &sols {
            writeln!(text, "{}", s.formula).expect("string write");
        }
    }
    let solutions: Vec<PropSolutionData> = sols
        .iter()
        .map(|s| PropSolutionData { formula: s.formula.to_string(), table: s.table.clone() })
        .collect();
    Ok(Outcome {
        code: if solutions.is_empty() { 1 } else { 0 },
        payload: Payload::QueryProp { solutions },
        text,
        warnings: Vec::new(),
    })
}
