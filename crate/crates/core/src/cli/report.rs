use serde::Serialize;
use serde_json::Value as Json;
use sha2::{Digest, Sha256};

use crate::egraph::{CycleWitness, ExecutionGraph, Model, Names};
use crate::explore::{ExploreVerdict, Outcome, Violation, ViolationKind};
use crate::machine::RegisterMachine;
use crate::saturation::{Diagnostic, Stage};

/// Bumped on any incompatible change to the JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: &'static str,
    pub input: Input,
    /// The only field that varies between identical invocations.
    pub timestamp: Timestamp,
    /// Requested model: `wra`, `ra`, `sra` or `all`.
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<DepthInfo>,
    pub weakest_violated: Option<Model>,
    pub conclusive: bool,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageReport>,
    pub models: Vec<ModelReport>,
    pub counterexample: Option<Counterexample>,
    pub stats: Stats,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lint: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for Tool {
    fn default() -> Self {
        Tool { name: "rmv", version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Input {
    /// `sha256:` digest of the machine file, or of the trace without one.
    pub digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub machine: Option<MachineSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MachineSummary {
    pub name: String,
    pub states: usize,
    pub transitions: usize,
    pub threads: usize,
    pub vars: usize,
    pub regs: usize,
    pub acyclic: bool,
}

impl MachineSummary {
    pub fn of(m: &RegisterMachine) -> Self {
        MachineSummary {
            name: m.name.clone(),
            states: m.states.len(),
            transitions: m.transitions.len(),
            threads: m.threads.len(),
            vars: m.vars.len(),
            regs: m.regs.len(),
            acyclic: m.is_acyclic(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timestamp {
    pub unix_ms: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DepthInfo {
    pub value: usize,
    /// `flag` when given with `--depth`, else `default`.
    pub source: &'static str,
    pub cap: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    pub passed: bool,
    pub facts_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelStatus {
    Pass,
    Violated,
    /// Violated because a weaker model is.
    Implied,
    CleanBounded,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub model: Model,
    /// `saturation`, `explore`, `graph` or `implied`.
    pub method: &'static str,
    pub status: ModelStatus,
    pub conclusive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u64>,
}

impl ModelReport {
    pub fn from_explore(v: &ExploreVerdict) -> Self {
        let status = match v.outcome {
            Outcome::Violation(_) => ModelStatus::Violated,
            Outcome::CleanExhaustive => ModelStatus::Pass,
            Outcome::CleanBounded(_) => ModelStatus::CleanBounded,
        };
        ModelReport {
            model: v.model,
            method: "explore",
            status,
            conclusive: v.conclusive(),
            nodes: Some(v.stats.nodes),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub model: Model,
    /// `ghost-read`, `mismatched-read` or `cycle`.
    pub kind: &'static str,
    /// Trace file lines; replayable with `rmv run`.
    pub trace: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<usize>,
    pub witness: Option<Json>,
    pub graph: Json,
}

impl Counterexample {
    pub fn from_violation(model: Model, v: &Violation, m: &RegisterMachine) -> Self {
        let names = Names::of_machine(m);
        Counterexample {
            model,
            kind: kind_name(v.kind),
            trace: v.run.trace_lines(m),
            transitions: v.run.transitions(),
            witness: v.witness.as_ref().map(|w| w.to_json(&names)),
            graph: v.graph.to_json(&names),
        }
    }

    pub fn from_graph(model: Model, trace: Vec<String>, g: &ExecutionGraph, w: &CycleWitness, names: &Names) -> Self {
        Counterexample {
            model,
            kind: "cycle",
            trace,
            transitions: Vec::new(),
            witness: Some(w.to_json(names)),
            graph: g.to_json(names),
        }
    }
}

pub fn kind_name(k: ViolationKind) -> &'static str {
    match k {
        ViolationKind::GhostRead => "ghost-read",
        ViolationKind::MismatchedRead => "mismatched-read",
        ViolationKind::Cycle => "cycle",
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Stats {
    pub facts: usize,
    pub nodes: u64,
    pub memo_hits: u64,
    pub max_depth: usize,
}

impl Report {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let mut s = String::from("sha256:");
    for b in hash.iter() {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
