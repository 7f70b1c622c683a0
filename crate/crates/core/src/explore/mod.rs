//! Enumeration of differentiated runs, checking each execution graph as it
//! grows. This decides RA and SRA for acyclic machines and gives bounded
//! answers otherwise; for WRA it cross-checks saturation.
//!
//! The search is depth-first in declaration order. Once a violation of
//! length `L` is found, only shorter runs are explored further, so the
//! reported run is the shortest violation and, among those, the
//! lexicographically least sequence of transition indices.

mod graph;

use std::collections::HashMap;

use thiserror::Error;

use crate::egraph::{check_model, graph_of_run, CycleWitness, ExecutionGraph, GraphError, Model};
use crate::machine::{Op, RegisterMachine, ReplayError, Run, Transition};
use crate::saturation::{verify_wra, WraVerdict};
use graph::SearchGraph;

/// Ceiling applied by [`default_depth`] to cyclic machines.
pub const DEFAULT_DEPTH_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// A read outputs a register that holds the initial value.
    GhostRead,
    /// A read on `x` outputs a value written on another variable.
    MismatchedRead,
    /// The graph violates the model.
    Cycle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub run: Run,
    /// Graph of the run; for a mismatched read, of the run without its last
    /// step.
    pub graph: ExecutionGraph,
    /// Present for [`ViolationKind::Cycle`].
    pub witness: Option<CycleWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Violation(Box<Violation>),
    /// Every run was covered.
    CleanExhaustive,
    /// No violation among runs up to the given length; longer runs exist.
    CleanBounded(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExploreStats {
    pub nodes: u64,
    pub max_depth: usize,
    pub bound: usize,
    /// Subtrees skipped because an equivalent one was already explored.
    pub memo_hits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploreVerdict {
    pub model: Model,
    pub outcome: Outcome,
    pub stats: ExploreStats,
}

impl ExploreVerdict {
    pub fn violation(&self) -> Option<&Violation> {
        match &self.outcome {
            Outcome::Violation(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_violation(&self) -> bool {
        self.violation().is_some()
    }

    /// False exactly for clean-bounded results.
    pub fn conclusive(&self) -> bool {
        !matches!(self.outcome, Outcome::CleanBounded(_))
    }
}

#[derive(Clone, Copy)]
struct Memo {
    budget: usize,
    height: usize,
    conclusive: bool,
}

struct Search<'m> {
    m: &'m RegisterMachine,
    model: Model,
    succ: Vec<Vec<usize>>,
    can_read: Vec<bool>,
    graph: SearchGraph,
    state: usize,
    regs: Vec<Option<u32>>,
    next_token: u32,
    trace: Vec<usize>,
    limit: usize,
    best: Option<(Vec<usize>, ViolationKind)>,
    found: u32,
    memo: Option<HashMap<Vec<u8>, Memo>>,
    stats: ExploreStats,
}

impl Search<'_> {
    /// Explores below the current node. Returns the height explored and
    /// whether no branch was cut by the depth limit.
    fn dfs(&mut self, depth: usize) -> (usize, bool) {
        self.stats.nodes += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        if !self.can_read[self.state] {
            return (0, true);
        }
        if depth >= self.limit {
            return (0, false);
        }
        let budget = self.limit - depth;
        let key = self.memo.as_ref().map(|_| self.graph.wra_key(self.state, &self.regs));
        if let (Some(memo), Some(key)) = (&self.memo, &key) {
            if let Some(e) = memo.get(key) {
                if budget <= e.budget {
                    self.stats.memo_hits += 1;
                    return (e.height.min(budget), e.conclusive && e.height <= budget);
                }
            }
        }
        let found_before = self.found;
        let (mut height, mut conclusive) = (0, true);
        for k in 0..self.succ[self.state].len() {
            let t = self.m.transitions[self.succ[self.state][k]].clone();
            let cp = self.graph.checkpoint();
            let (state, regs, token) = (self.state, self.regs.clone(), self.next_token);
            self.trace.push(t.index);
            let violation = self.fire(&t);
            if let Some(kind) = violation {
                self.best = Some((self.trace.clone(), kind));
                self.found += 1;
                self.limit = depth;
            } else {
                let (h, c) = self.dfs(depth + 1);
                height = height.max(h + 1);
                conclusive &= c;
            }
            self.trace.pop();
            self.graph.rollback(cp);
            (self.state, self.regs, self.next_token) = (state, regs, token);
            if depth >= self.limit {
                break;
            }
        }
        if let (Some(memo), Some(key)) = (&mut self.memo, key) {
            if self.found == found_before {
                memo.insert(key, Memo { budget, height, conclusive });
            }
        }
        (height, conclusive)
    }

    fn fire(&mut self, t: &Transition) -> Option<ViolationKind> {
        self.state = t.to;
        match t.op {
            Op::Write { thread, var, reg } => {
                self.graph.add_write(thread, var);
                self.regs[reg] = Some(self.next_token);
                self.next_token += 1;
                None
            }
            Op::Copy { dst, src } => {
                self.regs[dst] = self.regs[src];
                None
            }
            Op::Read { thread, var, reg } => {
                let Some(token) = self.regs[reg] else {
                    return Some(ViolationKind::GhostRead);
                };
                let source = self.graph.source_of(token);
                if self.graph.var_of(source) != var {
                    return Some(ViolationKind::MismatchedRead);
                }
                self.graph.add_read(thread, var, source, self.model).then_some(ViolationKind::Cycle)
            }
        }
    }
}

/// States from which some read transition can still be taken.
fn can_read(m: &RegisterMachine) -> Vec<bool> {
    let mut can = vec![false; m.states.len()];
    for t in &m.transitions {
        if t.op.is_read() {
            can[t.from] = true;
        }
    }
    loop {
        let mut changed = false;
        for t in &m.transitions {
            if can[t.to] && !can[t.from] {
                can[t.from] = true;
                changed = true;
            }
        }
        if !changed {
            return can;
        }
    }
}

/// Searches for a run of at most `depth` steps violating `model`. Ghost and
/// mismatched reads count as violations of every model.
pub fn find_violation(m: &RegisterMachine, model: Model, depth: usize) -> ExploreVerdict {
    let mut s = Search {
        m,
        model,
        succ: m.successors(),
        can_read: can_read(m),
        graph: SearchGraph::new(m.threads.len(), m.vars.len(), depth),
        state: m.initial,
        regs: vec![None; m.regs.len()],
        next_token: 1,
        trace: Vec::new(),
        limit: depth,
        best: None,
        found: 0,
        memo: (model == Model::Wra).then(HashMap::new),
        stats: ExploreStats { bound: depth, ..Default::default() },
    };
    let (_, conclusive) = s.dfs(0);
    let outcome = match s.best.take() {
        Some((trace, kind)) => Outcome::Violation(Box::new(confirm(m, model, &trace, kind))),
        None if conclusive => Outcome::CleanExhaustive,
        None => Outcome::CleanBounded(depth),
    };
    ExploreVerdict { model, outcome, stats: s.stats }
}

/// Replays a violating trace and re-derives its witness with the general
/// graph checks.
fn confirm(m: &RegisterMachine, model: Model, trace: &[usize], kind: ViolationKind) -> Violation {
    let run = m.execute(trace).expect("search traces are runs");
    let graph = match kind {
        ViolationKind::MismatchedRead => {
            let prefix = Run { steps: run.steps[..run.len() - 1].to_vec() };
            graph_of_run(&prefix, m)
        }
        _ => graph_of_run(&run, m),
    }
    .expect("search traces have well-defined graphs");
    let witness = match kind {
        ViolationKind::Cycle => Some(check_model(&graph, model).expect_err("incremental and full checks agree")),
        _ => None,
    };
    Violation { kind, run, graph, witness }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayFailure {
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Deterministic re-execution of a trace of transition indices.
pub fn replay(m: &RegisterMachine, trace: &[usize]) -> Result<(Run, ExecutionGraph), ReplayFailure> {
    let run = m.execute(trace)?;
    let g = graph_of_run(&run, m)?;
    Ok((run, g))
}

/// Exact longest path for acyclic machines. Otherwise the larger of
/// `2·|Θ|²·(1+|R|)` and the longest simple path, capped at
/// [`DEFAULT_DEPTH_CAP`].
pub fn default_depth(m: &RegisterMachine) -> usize {
    default_depth_capped(m, DEFAULT_DEPTH_CAP)
}

pub fn default_depth_capped(m: &RegisterMachine, cap: usize) -> usize {
    if let Some(n) = m.longest_path() {
        return n;
    }
    let threads = m.threads.len();
    let formula = 2 * threads * threads * (1 + m.regs.len());
    formula.max(m.longest_simple_path(cap)).min(cap).max(1)
}

/// Per-model evidence behind [`weakest_violated`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weakest {
    /// `None` when no model is violated.
    pub weakest: Option<Model>,
    pub saturation: WraVerdict,
    /// Exploration results in the order run: WRA (only when saturation
    /// fails, to find a run), then RA and SRA as needed.
    pub explored: Vec<ExploreVerdict>,
}

impl Weakest {
    /// False when no violation was found and some exploration was bounded.
    pub fn conclusive(&self) -> bool {
        self.weakest.is_some() || self.explored.iter().all(ExploreVerdict::conclusive)
    }

    pub fn explored(&self, model: Model) -> Option<&ExploreVerdict> {
        self.explored.iter().find(|v| v.model == model)
    }
}

/// Checks WRA by saturation, then RA and SRA by exploration up to `depth`,
/// stopping at the first violated model. `strongest` limits the models
/// considered.
pub fn weakest_violated_up_to(m: &RegisterMachine, depth: usize, strongest: Model) -> Weakest {
    let saturation = verify_wra(m);
    if !saturation.passed() {
        let explored = vec![find_violation(m, Model::Wra, depth)];
        return Weakest { weakest: Some(Model::Wra), saturation, explored };
    }
    let mut explored = Vec::new();
    for model in [Model::Ra, Model::Sra] {
        if model > strongest {
            break;
        }
        let v = find_violation(m, model, depth);
        let hit = v.is_violation();
        explored.push(v);
        if hit {
            return Weakest { weakest: Some(model), saturation, explored };
        }
    }
    Weakest { weakest: None, saturation, explored }
}

pub fn weakest_violated(m: &RegisterMachine, depth: usize) -> Weakest {
    weakest_violated_up_to(m, depth, Model::Sra)
}
