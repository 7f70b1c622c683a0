//! Library side of the `rmv` command: each `cmd_*` function reads its
//! inputs, writes human text or a JSON [`Report`] and returns an [`Exit`].
//!
//! Exit codes: 0 consistent, 1 violation, 2 usage or input error, 3 no
//! violation found but exploration was bounded.

mod report;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::egraph::{check_model, graph_of_run, graph_of_trace, CycleWitness, ExecutionGraph, Model, Names};
use crate::explore::{default_depth_capped, weakest_violated, weakest_violated_up_to, Violation, DEFAULT_DEPTH_CAP};
use crate::gadgets::{litmus, litmus_specs, sat_to_machine, tautology_to_machine, Form, Formula};
use crate::machine::{parse_machine, parse_trace, RegisterMachine};
use crate::saturation::explain;

pub use report::{
    digest, kind_name, Counterexample, DepthInfo, Input, MachineSummary, ModelReport, ModelStatus, Report, StageReport,
    Stats, Timestamp, Tool, SCHEMA_VERSION,
};

/// Overrides [`DEFAULT_DEPTH_CAP`] when set.
pub const DEPTH_CAP_ENV: &str = "RMV_DEPTH_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Consistent = 0,
    Violation = 1,
    Usage = 2,
    Inconclusive = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Value of `--model`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelChoice {
    Wra,
    Ra,
    Sra,
    #[default]
    All,
}

impl ModelChoice {
    /// Strongest model the choice asks about; `all` goes up to SRA.
    pub fn strongest(self) -> Model {
        match self {
            ModelChoice::Wra => Model::Wra,
            ModelChoice::Ra => Model::Ra,
            ModelChoice::Sra | ModelChoice::All => Model::Sra,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelChoice::Wra => "wra",
            ModelChoice::Ra => "ra",
            ModelChoice::Sra => "sra",
            ModelChoice::All => "all",
        }
    }
}

impl fmt::Display for ModelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "wra" => Ok(ModelChoice::Wra),
            "ra" => Ok(ModelChoice::Ra),
            "sra" => Ok(ModelChoice::Sra),
            "all" => Ok(ModelChoice::All),
            _ => Err(format!("unknown model `{s}`; expected wra, ra, sra or all")),
        }
    }
}

/// Reads [`DEPTH_CAP_ENV`]. Unset or empty means no override.
pub fn depth_cap_from_env() -> Result<Option<usize>, String> {
    match std::env::var(DEPTH_CAP_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{DEPTH_CAP_ENV} must be a positive integer, got `{v}`")),
        },
        Err(_) => Ok(None),
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckArgs {
    pub machine: PathBuf,
    pub model: ModelChoice,
    pub depth: Option<usize>,
    pub depth_cap: Option<usize>,
    pub json: bool,
    pub quiet: bool,
    pub dot: Option<PathBuf>,
    pub lint: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunArgs {
    /// `None` checks the trace on its own.
    pub machine: Option<PathBuf>,
    pub trace: PathBuf,
    pub model: ModelChoice,
    pub json: bool,
    pub quiet: bool,
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct GadgetArgs {
    pub taut: Option<String>,
    pub sat: Option<String>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct LitmusArgs {
    /// `None` lists the corpus.
    pub name: Option<String>,
    pub output: Option<PathBuf>,
    pub check: bool,
    pub depth_cap: Option<usize>,
}

fn read(path: &Path, err: &mut dyn Write) -> Option<Vec<u8>> {
    match fs::read(path) {
        Ok(b) => Some(b),
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            None
        }
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    match path {
        Some(p) => match fs::write(p, text) {
            Ok(()) => Exit::Consistent,
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", p.display());
                Exit::Usage
            }
        },
        None => {
            let _ = out.write_all(text.as_bytes());
            Exit::Consistent
        }
    }
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Everything `cmd_check` prints, computed without touching the file
/// system.
pub struct CheckOutcome {
    pub report: Report,
    /// Counterexample graph and witness for `--dot`.
    pub violation: Option<Violation>,
}

/// Runs ghost, mismatch and hidden-read saturation, then RA and SRA
/// exploration, stopping at the weakest violated model.
pub fn check_machine(m: &RegisterMachine, source: &[u8], args: &CheckArgs) -> CheckOutcome {
    let start = Instant::now();
    let unix_ms = now_ms();
    let strongest = args.model.strongest();
    let cap = args.depth_cap.unwrap_or(DEFAULT_DEPTH_CAP);
    let (depth, depth_source) = match args.depth {
        Some(d) => (d, "flag"),
        None => (default_depth_capped(m, cap), "default"),
    };
    let w = weakest_violated_up_to(m, depth, strongest);
    let wra_run = w.explored(Model::Wra).and_then(|v| v.violation()).map(|v| &v.run);

    let stages: Vec<StageReport> = w
        .saturation
        .stages
        .iter()
        .map(|s| StageReport {
            stage: s.stage,
            passed: s.passed(),
            facts_count: s.facts_count(),
            diagnostic: explain(s, m, wra_run).ok(),
        })
        .collect();

    let mut models = vec![ModelReport {
        model: Model::Wra,
        method: "saturation",
        status: if w.saturation.passed() { ModelStatus::Pass } else { ModelStatus::Violated },
        conclusive: true,
        nodes: None,
    }];
    for model in [Model::Ra, Model::Sra] {
        if model > strongest {
            break;
        }
        if w.weakest.is_some_and(|k| k < model) {
            models.push(ModelReport {
                model,
                method: "implied",
                status: ModelStatus::Implied,
                conclusive: true,
                nodes: None,
            });
        } else if let Some(v) = w.explored(model) {
            models.push(ModelReport::from_explore(v));
        }
    }

    let violation = w.weakest.and_then(|k| w.explored(k)).and_then(|v| v.violation()).cloned();
    let counterexample = match (w.weakest, &violation) {
        (Some(k), Some(v)) => Some(Counterexample::from_violation(k, v, m)),
        _ => None,
    };
    let conclusive = w.conclusive();
    let exit = match (w.weakest, conclusive) {
        (Some(_), _) => Exit::Violation,
        (None, true) => Exit::Consistent,
        (None, false) => Exit::Inconclusive,
    };
    let stats = Stats {
        facts: w.saturation.stages.iter().map(|s| s.facts_count()).sum(),
        nodes: w.explored.iter().map(|v| v.stats.nodes).sum(),
        memo_hits: w.explored.iter().map(|v| v.stats.memo_hits).sum(),
        max_depth: w.explored.iter().map(|v| v.stats.max_depth).max().unwrap_or(0),
    };
    let lint = if args.lint {
        m.reactivity_gaps()
            .iter()
            .map(|g| {
                format!(
                    "state {} has no {} by {} on {}",
                    m.states[g.state],
                    if g.write { "write" } else { "read" },
                    m.threads[g.thread],
                    m.vars[g.var]
                )
            })
            .collect()
    } else {
        Vec::new()
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        tool: Tool::default(),
        command: "check",
        input: Input { digest: digest(source), trace_digest: None, machine: Some(MachineSummary::of(m)) },
        timestamp: Timestamp { unix_ms, elapsed_ms: start.elapsed().as_millis() as u64 },
        model: args.model.name().into(),
        depth: Some(DepthInfo { value: depth, source: depth_source, cap }),
        weakest_violated: w.weakest,
        conclusive,
        exit_code: exit.code(),
        stages,
        models,
        counterexample,
        stats,
        lint,
    };
    CheckOutcome { report, violation }
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let Some(bytes) = read(&args.machine, err) else { return Exit::Usage };
    let m = match parse_machine(&bytes) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", args.machine.display());
            return Exit::Usage;
        }
    };
    let CheckOutcome { report, violation } = check_machine(&m, &bytes, args);
    if let Some(path) = &args.dot {
        if let Some(v) = &violation {
            let dot = v.graph.to_dot(&Names::of_machine(&m), v.witness.as_ref());
            if emit(Some(path), &dot, out, err) == Exit::Usage {
                return Exit::Usage;
            }
        } else if !args.quiet {
            let _ = writeln!(err, "note: no counterexample; {} not written", path.display());
        }
    }
    if args.json {
        let _ = writeln!(out, "{}", report.to_json_string());
    } else if !args.quiet {
        let _ = out.write_all(render_check(&report, violation.as_ref(), &m).as_bytes());
    }
    match report.exit_code {
        0 => Exit::Consistent,
        1 => Exit::Violation,
        _ => Exit::Inconclusive,
    }
}

fn status_text(s: ModelStatus) -> &'static str {
    match s {
        ModelStatus::Pass => "pass",
        ModelStatus::Violated => "violated",
        ModelStatus::Implied => "violated (implied)",
        ModelStatus::CleanBounded => "no violation within bound (inconclusive)",
    }
}

fn render_check(r: &Report, v: Option<&Violation>, m: &RegisterMachine) -> String {
    let mut s = String::new();
    let ms = r.input.machine.as_ref().expect("check reports carry the machine");
    s += &format!(
        "machine {}: {} states, {} transitions, {}\n",
        ms.name,
        ms.states,
        ms.transitions,
        if ms.acyclic { "acyclic" } else { "cyclic" }
    );
    if let Some(d) = &r.depth {
        s += &format!("depth {} ({}, cap {})\n", d.value, d.source, d.cap);
    }
    for l in &r.lint {
        s += &format!("lint: {l}\n");
    }
    for st in &r.stages {
        s += &format!("{} stage: {} ({} facts)\n", st.stage, if st.passed { "pass" } else { "FAIL" }, st.facts_count);
        if let Some(d) = &st.diagnostic {
            for line in d.render().lines().skip(1).take_while(|l| *l != "violating run:") {
                s += &format!("  {line}\n");
            }
        }
    }
    for mr in &r.models {
        s += &format!("{}: {} [{}]\n", mr.model, status_text(mr.status), mr.method);
    }
    if let (Some(c), Some(v)) = (&r.counterexample, v) {
        s += &format!("counterexample ({}, {}):\n", c.model, c.kind);
        for line in &c.trace {
            s += &format!("  {line}\n");
        }
        if let Some(w) = &v.witness {
            s += &format!("  cycle: {}\n", witness_text(&v.graph, w, &Names::of_machine(m)));
        }
    }
    s += &format!("weakest violated: {}\n", weakest_text(r));
    s
}

fn weakest_text(r: &Report) -> String {
    match (r.weakest_violated, r.conclusive) {
        (Some(k), _) => k.to_string(),
        (None, true) => "none".into(),
        (None, false) => "none found (inconclusive)".into(),
    }
}

/// `e1:W(t1,x,1) -po-> e2:R(t1,x,1) -> ... -> e1`.
pub fn witness_text(g: &ExecutionGraph, w: &CycleWitness, names: &Names) -> String {
    let label = |id: usize| {
        let e = g.event(id);
        let var = &names.vars[e.var];
        match e.thread {
            None => format!("e{id}:init({var})"),
            Some(t) => {
                let op = if e.is_write() { "W" } else { "R" };
                format!("e{id}:{op}({},{var},{})", names.threads[t], e.value.literal())
            }
        }
    };
    let mut s = String::new();
    for step in &w.cycle {
        s += &label(step.event);
        if let Some(k) = step.edge {
            s += &format!(" -{}-> ", k.label());
        }
    }
    s
}

/// Checks a single trace, against a machine when one is given.
pub fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let start = Instant::now();
    let unix_ms = now_ms();
    let Some(trace_bytes) = read(&args.trace, err) else { return Exit::Usage };
    let fail = |err: &mut dyn Write, what: &Path, e: &dyn fmt::Display| {
        let _ = writeln!(err, "error: {}: {e}", what.display());
        Exit::Usage
    };
    let trace = match parse_trace(&trace_bytes) {
        Ok(t) => t,
        Err(e) => return fail(err, &args.trace, &e),
    };
    let (g, names, machine, digest_of) = match &args.machine {
        Some(path) => {
            let Some(bytes) = read(path, err) else { return Exit::Usage };
            let m = match parse_machine(&bytes) {
                Ok(m) => m,
                Err(e) => return fail(err, path, &e),
            };
            let run = match m.match_trace(&trace) {
                Ok(r) => r,
                Err(e) => return fail(err, &args.trace, &e),
            };
            let g = match graph_of_run(&run, &m) {
                Ok(g) => g,
                Err(e) => return fail(err, &args.trace, &e),
            };
            (g, Names::of_machine(&m), Some(MachineSummary::of(&m)), digest(&bytes))
        }
        None => match graph_of_trace(&trace) {
            Ok((g, threads, vars)) => (g, Names { threads, vars }, None, digest(&trace_bytes)),
            Err(e) => return fail(err, &args.trace, &e),
        },
    };

    let strongest = args.model.strongest();
    let mut models = Vec::new();
    let mut weakest = None;
    let mut witness = None;
    for model in Model::ALL {
        if model > strongest {
            break;
        }
        if weakest.is_some() {
            models.push(ModelReport {
                model,
                method: "implied",
                status: ModelStatus::Implied,
                conclusive: true,
                nodes: None,
            });
            continue;
        }
        let status = match check_model(&g, model) {
            Ok(()) => ModelStatus::Pass,
            Err(w) => {
                weakest = Some(model);
                witness = Some(w);
                ModelStatus::Violated
            }
        };
        models.push(ModelReport { model, method: "graph", status, conclusive: true, nodes: None });
    }
    let lines: Vec<String> = trace.steps.iter().map(|s| s.text()).collect();
    let counterexample = match (weakest, &witness) {
        (Some(k), Some(w)) => Some(Counterexample::from_graph(k, lines, &g, w, &names)),
        _ => None,
    };
    let exit = if weakest.is_some() { Exit::Violation } else { Exit::Consistent };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        tool: Tool::default(),
        command: "run",
        input: Input { digest: digest_of, trace_digest: machine.is_some().then(|| digest(&trace_bytes)), machine },
        timestamp: Timestamp { unix_ms, elapsed_ms: start.elapsed().as_millis() as u64 },
        model: args.model.name().into(),
        depth: None,
        weakest_violated: weakest,
        conclusive: true,
        exit_code: exit.code(),
        stages: Vec::new(),
        models,
        counterexample,
        stats: Stats::default(),
        lint: Vec::new(),
    };
    if let (Some(path), Some(w)) = (&args.dot, &witness) {
        if emit(Some(path), &g.to_dot(&names, Some(w)), out, err) == Exit::Usage {
            return Exit::Usage;
        }
    }
    if args.json {
        let _ = writeln!(out, "{}", report.to_json_string());
    } else if !args.quiet {
        let mut s = format!("trace: {} steps, {} events\n", trace.steps.len(), g.events().len());
        for mr in &report.models {
            s += &format!("{}: {}\n", mr.model, status_text(mr.status));
        }
        if let Some(w) = &witness {
            s += &format!("cycle: {}\n", witness_text(&g, w, &names));
        }
        s += &format!("weakest violated: {}\n", weakest_text(&report));
        let _ = out.write_all(s.as_bytes());
    }
    exit
}

/// Writes the machine encoding a formula: `--taut` for a DNF tautology
/// question, `--sat` for CNF satisfiability.
pub fn cmd_gadget(args: &GadgetArgs, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let (text, form) = match (&args.taut, &args.sat) {
        (Some(t), None) => (t, Form::Dnf),
        (None, Some(s)) => (s, Form::Cnf),
        _ => {
            let _ = writeln!(err, "error: give exactly one of --taut or --sat");
            return Exit::Usage;
        }
    };
    let f = match Formula::parse(text, form) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error: formula: {e}");
            return Exit::Usage;
        }
    };
    let m = match form {
        Form::Dnf => tautology_to_machine(&f),
        Form::Cnf => sat_to_machine(&f),
    }
    .expect("form matches the constructor");
    emit(args.output.as_deref(), &m.print(), out, err)
}

/// Lists the corpus, prints one machine, or checks it against its expected
/// weakest violated model.
pub fn cmd_litmus(args: &LitmusArgs, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let Some(name) = &args.name else {
        for s in litmus_specs() {
            let expected = s.expected.map_or("none".to_string(), |m| m.to_string());
            let _ = writeln!(out, "{:<20} {:<5} {}", s.name, expected, s.summary);
        }
        return Exit::Consistent;
    };
    let spec = match litmus(name) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return Exit::Usage;
        }
    };
    let m = (spec.build)();
    if !args.check {
        return emit(args.output.as_deref(), &m.print(), out, err);
    }
    let depth = default_depth_capped(&m, args.depth_cap.unwrap_or(DEFAULT_DEPTH_CAP));
    let w = weakest_violated(&m, depth);
    let show = |k: Option<Model>| k.map_or("none".to_string(), |m| m.to_string());
    let _ = writeln!(out, "weakest violated: {}", show(w.weakest));
    let verdict = if w.weakest == spec.expected { "matches" } else { "DIFFERS" };
    let _ = writeln!(out, "expected: {} ({verdict})", show(spec.expected));
    match (w.weakest, w.conclusive()) {
        (Some(_), _) => Exit::Violation,
        (None, true) => Exit::Consistent,
        (None, false) => Exit::Inconclusive,
    }
}

#[cfg(test)]
mod tests;
