use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hxpath_core::frames::{parse_axiom_file, parse_rule_file};
use hxpath_core::oracle::{bounded_sat_in, default_bound, Bound, OracleAnswer};
use hxpath_core::pspace::{self, PspaceOptions};
use hxpath_core::semantics::{check_node, DataModel, FrameClass};
use hxpath_core::syntax::{parse_lines, size_node};
use hxpath_core::tableau::{saturate_with, Calculus, TraceEvent, Verdict};
use hxpath_core::{parse_node, print_node, Node, Nominal};

// Stdout may be a closed pipe (`hxtab ... | head`); write errors are ignored.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_UNKNOWN: u8 = 30;
const EXIT_ERROR: u8 = 1;

#[derive(Parser)]
#[command(name = "hxtab", version, about = "Tableau satisfiability checker for hybrid XPath with data comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide satisfiability; exits 10 (SAT), 20 (UNSAT) or 30 (UNKNOWN).
    Sat(Query),
    /// Decide and emit the extracted model.
    Model {
        #[command(flatten)]
        query: Query,
        /// Write the model here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide and emit every rule application.
    Trace(Query),
    /// Evaluate a formula on a model file; exits 10 when it holds, 20 otherwise.
    Check {
        model: PathBuf,
        formula: String,
        /// Node name or nominal to evaluate at; default: report every node where it holds.
        #[arg(long)]
        at: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text, env = "HXTAB_FORMAT")]
        format: Format,
    },
    /// Search all small models; exits 10 on a witness, 20 when none exists, 30 on timeout.
    Oracle {
        formula: String,
        /// Largest node count; default max(3, nominals + modal depth).
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long, default_value_t = 60)]
        seconds: u64,
        #[arg(long, value_enum, default_value_t = Frame::All, env = "HXTAB_FRAME")]
        frame: Frame,
        #[arg(long, value_enum, default_value_t = Format::Text, env = "HXTAB_FORMAT")]
        format: Format,
    },
}

#[derive(Args)]
struct Query {
    /// Inline formula.
    #[arg(required_unless_present = "file", conflicts_with = "file")]
    formula: Option<String>,
    /// File with one formula per line (`#` comments).
    #[arg(short, long)]
    file: Option<PathBuf>,
    #[command(flatten)]
    cfg: RunConfig,
}

#[derive(Args, Clone)]
struct RunConfig {
    #[arg(short, long, value_enum, default_value_t = Engine::Naive, env = "HXTAB_ENGINE")]
    engine: Engine,
    #[arg(long, value_enum, default_value_t = Frame::All, env = "HXTAB_FRAME")]
    frame: Frame,
    /// Pure axioms, one per line.
    #[arg(long, env = "HXTAB_AXIOMS")]
    axioms: Option<PathBuf>,
    /// Node-creating rules, one per line.
    #[arg(long, env = "HXTAB_NODE_RULES")]
    node_rules: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text, env = "HXTAB_FORMAT")]
    format: Format,
    /// Budget on rule applications plus labels copied at branching points.
    #[arg(long, default_value_t = 2_000_000, env = "HXTAB_MAX_STEPS")]
    max_steps: usize,
    /// Firings allowed per node-creating rule.
    #[arg(long, default_value_t = 100, env = "HXTAB_NODE_RULE_BUDGET")]
    node_rule_budget: usize,
    /// Report search counters.
    #[arg(long, env = "HXTAB_METRICS")]
    metrics: bool,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Engine {
    Naive,
    Pspace,
}

#[derive(Clone, Copy, ValueEnum)]
enum Frame {
    All,
    Forest,
    Tree,
}

impl From<Frame> for FrameClass {
    fn from(f: Frame) -> Self {
        match f {
            Frame::All => FrameClass::All,
            Frame::Forest => FrameClass::Forest,
            Frame::Tree => FrameClass::Tree,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Dot,
}

struct Outcome {
    verdict: Verdict,
    metrics: Value,
    clash: Option<Vec<String>>,
    trace: Vec<TraceEvent>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

impl RunConfig {
    fn calculus(&self) -> Result<Calculus> {
        let mut c = Calculus::with_frame(self.frame.into());
        c.max_steps = self.max_steps;
        c.node_rule_budget = self.node_rule_budget;
        if let Some(p) = &self.axioms {
            c.axioms = parse_axiom_file(&read(p)?).with_context(|| format!("in {}", p.display()))?;
        }
        if let Some(p) = &self.node_rules {
            c.node_rules = parse_rule_file(&read(p)?).with_context(|| format!("in {}", p.display()))?;
        }
        Ok(c)
    }

    fn decide(&self, phi: &Node, trace: bool) -> Result<Outcome> {
        let calculus = self.calculus()?;
        let size = size_node(phi);
        Ok(match self.engine {
            Engine::Naive => {
                let run = saturate_with(phi, calculus, trace);
                let mut metrics = serde_json::to_value(&run.stats)?;
                metrics["engine"] = json!("naive");
                metrics["size"] = json!(size);
                Outcome {
                    verdict: run.verdict,
                    metrics,
                    clash: run.last_clash.map(|c| c.1),
                    trace: run.trace.unwrap_or_default(),
                }
            }
            Engine::Pspace => {
                let run = pspace::run(phi, PspaceOptions { calculus: Calculus { copy_variants: true, ..calculus }, trace });
                let mut metrics = serde_json::to_value(&run.metrics)?;
                metrics["engine"] = json!("pspace");
                metrics["size"] = json!(size);
                metrics["calls"] = serde_json::to_value(&run.calls)?;
                Outcome {
                    verdict: run.verdict,
                    metrics,
                    clash: run.last_clash.map(|c| c.1),
                    trace: run.trace.unwrap_or_default(),
                }
            }
        })
    }
}

impl Query {
    fn formulas(&self) -> Result<Vec<Node>> {
        match (&self.formula, &self.file) {
            (Some(f), None) => Ok(vec![parse_node(f).map_err(|e| anyhow::anyhow!("parse error: {e}"))?]),
            (None, Some(p)) => {
                let fs = parse_lines(&read(p)?).map_err(|e| anyhow::anyhow!("{}: parse error: {e}", p.display()))?;
                if fs.is_empty() {
                    bail!("{} contains no formulas", p.display());
                }
                Ok(fs)
            }
            _ => bail!("give either a formula or --file"),
        }
    }
}

fn verdict_code(vs: &[&Verdict]) -> u8 {
    if vs.iter().all(|v| v.is_sat()) {
        EXIT_SAT
    } else if vs.iter().any(|v| matches!(v, Verdict::Unknown(_))) {
        EXIT_UNKNOWN
    } else {
        EXIT_UNSAT
    }
}

fn verdict_line(v: &Verdict) -> String {
    match v {
        Verdict::Unknown(why) => format!("UNKNOWN ({why})"),
        other => other.word().to_string(),
    }
}

fn model_text(m: &DataModel) -> String {
    let mut out = String::new();
    for (v, name) in m.nodes.iter().enumerate() {
        let noms: Vec<String> = m.naming.iter().filter(|(_, &w)| w == v).map(|(i, _)| i.to_string()).collect();
        let props: Vec<String> = m.valuation.iter().filter(|(_, vs)| vs.contains(&v)).map(|(p, _)| p.to_string()).collect();
        let _ = writeln!(out, "node {name}  nominals {{{}}}  props {{{}}}", noms.join(", "), props.join(", "));
    }
    for (rel, es) in &m.edges {
        for &(x, y) in es {
            let _ = writeln!(out, "edge {rel}: {} -> {}", m.name(x), m.name(y));
        }
    }
    for (cmp, classes) in &m.data {
        for class in classes.iter().filter(|c| c.len() > 1) {
            let names: Vec<String> = class.iter().map(|&v| m.name(v)).collect();
            let _ = writeln!(out, "class {cmp}: {{{}}}", names.join(", "));
        }
    }
    out
}

fn render_model(m: &DataModel, format: Format) -> String {
    match format {
        Format::Text => model_text(m),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&m.to_json()).expect("model JSON")),
        Format::Dot => m.to_dot(),
    }
}

fn result_json(phi: &Node, o: &Outcome, metrics: bool) -> Value {
    let mut v = json!({ "formula": print_node(phi), "verdict": o.verdict.word() });
    if let Verdict::Unknown(why) = &o.verdict {
        v["reason"] = json!(why);
    }
    if let Some(m) = o.verdict.model() {
        v["model"] = m.to_json();
        v["root"] = json!(o.verdict.branch().map(|b| b.root().to_string()));
    }
    if let (false, Some(c)) = (o.verdict.is_sat(), &o.clash) {
        v["clash"] = json!(c);
    }
    if metrics {
        v["metrics"] = o.metrics.clone();
    }
    v
}

fn cmd_sat(q: &Query) -> Result<u8> {
    let phis = q.formulas()?;
    let many = phis.len() > 1;
    let mut outcomes = Vec::new();
    for phi in &phis {
        outcomes.push(q.cfg.decide(phi, false)?);
    }
    match q.cfg.format {
        Format::Json => {
            let results: Vec<Value> = phis.iter().zip(&outcomes).map(|(p, o)| result_json(p, o, q.cfg.metrics)).collect();
            outln!("{}", serde_json::to_string_pretty(&json!({ "results": results }))?);
        }
        format => {
            for (phi, o) in phis.iter().zip(&outcomes) {
                if many {
                    outln!("{}\t{}", verdict_line(&o.verdict), print_node(phi));
                } else {
                    outln!("{}", verdict_line(&o.verdict));
                }
                if let (false, Some(m)) = (many, o.verdict.model()) {
                    out!("{}", render_model(m, format));
                }
                if q.cfg.metrics {
                    outln!("metrics {}", o.metrics);
                }
            }
        }
    }
    Ok(verdict_code(&outcomes.iter().map(|o| &o.verdict).collect::<Vec<_>>()))
}

fn single(q: &Query) -> Result<Node> {
    let mut phis = q.formulas()?;
    if phis.len() != 1 {
        bail!("this command takes exactly one formula");
    }
    Ok(phis.remove(0))
}

fn cmd_model(q: &Query, output: Option<&Path>) -> Result<u8> {
    let phi = single(q)?;
    let o = q.cfg.decide(&phi, false)?;
    let Some(m) = o.verdict.model() else {
        eprintln!("{}", verdict_line(&o.verdict));
        return Ok(verdict_code(&[&o.verdict]));
    };
    let text = render_model(m, q.cfg.format);
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => out!("{text}"),
    }
    Ok(EXIT_SAT)
}

fn cmd_trace(q: &Query) -> Result<u8> {
    let phi = single(q)?;
    let o = q.cfg.decide(&phi, true)?;
    match q.cfg.format {
        Format::Json => {
            let mut doc = json!({ "verdict": o.verdict.word(), "trace": o.trace });
            if q.cfg.metrics {
                doc["metrics"] = o.metrics.clone();
            }
            outln!("{}", serde_json::to_string_pretty(&doc)?);
        }
        _ => {
            for e in &o.trace {
                let mut line = format!(
                    "{:>5} b{} {}: {} => {}",
                    e.step,
                    e.branch,
                    e.rule,
                    e.premises.join(", "),
                    e.conclusions.join(" | ")
                );
                if let Some(c) = &e.clash {
                    let _ = write!(line, "  CLASH {c}");
                }
                outln!("{line}");
            }
            outln!("{}", verdict_line(&o.verdict));
            if q.cfg.metrics {
                outln!("metrics {}", o.metrics);
            }
        }
    }
    Ok(verdict_code(&[&o.verdict]))
}

fn resolve_node(m: &DataModel, at: &str) -> Result<usize> {
    if let Some(v) = m.index_of(at) {
        return Ok(v);
    }
    let nominal: u32 = at.parse().with_context(|| format!("no node or nominal named {at}"))?;
    m.naming.get(&Nominal(nominal)).copied().with_context(|| format!("nominal {at} names no node"))
}

fn cmd_check(model: &Path, formula: &str, at: Option<&str>, format: Format) -> Result<u8> {
    let m = DataModel::from_json_str(&read(model)?).with_context(|| format!("in {}", model.display()))?;
    let violations = m.validate();
    if !violations.is_empty() {
        let shown: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        bail!("invalid model: {}", shown.join("; "));
    }
    let phi = parse_node(formula).map_err(|e| anyhow::anyhow!("parse error: {e}"))?;
    let nodes: Vec<usize> = match at {
        Some(a) => vec![resolve_node(&m, a)?],
        None => (0..m.len()).collect(),
    };
    let mut holds = Vec::new();
    for v in nodes {
        if check_node(&m, v, &phi)? {
            holds.push(m.name(v));
        }
    }
    let ok = !holds.is_empty();
    if format == Format::Json {
        outln!("{}", json!({ "holds": ok, "nodes": holds }));
    } else if at.is_some() {
        outln!("{ok}");
    } else {
        outln!("{ok}\t{{{}}}", holds.join(", "));
    }
    Ok(if ok { EXIT_SAT } else { EXIT_UNSAT })
}

fn cmd_oracle(formula: &str, bound: Option<usize>, seconds: u64, frame: Frame, format: Format) -> Result<u8> {
    let phi = parse_node(formula).map_err(|e| anyhow::anyhow!("parse error: {e}"))?;
    let b = Bound {
        max_nodes: bound.unwrap_or_else(|| default_bound(&phi).max_nodes),
        max_seconds: Duration::from_secs(seconds),
    };
    if b.max_nodes == 0 {
        bail!("the bound must be at least 1");
    }
    let answer = bounded_sat_in(&phi, b, frame.into());
    let (word, code) = match &answer {
        OracleAnswer::Witness(..) => ("Witness".to_string(), EXIT_SAT),
        OracleAnswer::NoModelUpTo(n) => (format!("NoModelUpTo({n})"), EXIT_UNSAT),
        OracleAnswer::TimedOut => ("TimedOut".to_string(), EXIT_UNKNOWN),
    };
    match (format, &answer) {
        (Format::Json, OracleAnswer::Witness(m, v)) => {
            outln!("{}", json!({ "answer": "Witness", "node": m.name(*v), "model": m.to_json() }))
        }
        (Format::Json, _) => outln!("{}", json!({ "answer": word })),
        (f, OracleAnswer::Witness(m, v)) => {
            outln!("Witness at node {}", m.name(*v));
            out!("{}", render_model(m, f));
        }
        _ => outln!("{word}"),
    }
    Ok(code)
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Sat(q) => cmd_sat(q),
        Command::Model { query, output } => cmd_model(query, output.as_deref()),
        Command::Trace(q) => cmd_trace(q),
        Command::Check { model, formula, at, format } => cmd_check(model, formula, at.as_deref(), *format),
        Command::Oracle { formula, bound, seconds, frame, format } => {
            cmd_oracle(formula, *bound, *seconds, *frame, *format)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
