//! Execution graphs: events with program order, reads-from and the partial
//! coherence order collected at reads, plus the consistency checks.

mod check;
mod dump;
mod totalize;

use std::collections::{BTreeSet, VecDeque};

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::machine::{Op, RegisterMachine, Run, Trace, TraceStep, Value};

pub use check::{
    check_hb_acyclic, check_model, check_ra, check_sra, check_wra, CycleStep, CycleWitness, EdgeKind, Relation,
};
pub use dump::Names;
pub use totalize::{totalize_co, TotalizeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Wra,
    Ra,
    Sra,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Wra, Model::Ra, Model::Sra];

    pub fn name(self) -> &'static str {
        match self {
            Model::Wra => "WRA",
            Model::Ra => "RA",
            Model::Sra => "SRA",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wra" => Ok(Model::Wra),
            "ra" => Ok(Model::Ra),
            "sra" => Ok(Model::Sra),
            _ => Err(format!("unknown model `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Init,
    Write,
    Read,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub id: usize,
    pub kind: EventKind,
    /// `None` exactly for initial writes.
    pub thread: Option<usize>,
    pub var: usize,
    pub value: Value,
}

impl Event {
    pub fn is_write(&self) -> bool {
        matches!(self.kind, EventKind::Write | EventKind::Init)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("value {0} is already written")]
    DuplicateValue(Value),
    #[error("no write of value {value} on variable {var}")]
    NoMatchingWrite { var: usize, value: Value },
    #[error("value {value} on variable {var} matches several writes")]
    Ambiguous { var: usize, value: Value },
    #[error("unknown variable {0}")]
    UnknownVar(usize),
    #[error("malformed graph: {0}")]
    Malformed(String),
}

/// A (partial) execution graph. Initial writes occupy ids `0..vars`, one per
/// variable. `po` is stored transitively; `co` holds only the explicitly
/// derived pairs, with each initial write implicitly `co`-before every other
/// write on its variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionGraph {
    events: Vec<Event>,
    vars: usize,
    po: BTreeSet<(usize, usize)>,
    rf: BTreeSet<(usize, usize)>,
    co: BTreeSet<(usize, usize)>,
}

impl ExecutionGraph {
    pub fn init_graph(vars: usize) -> Self {
        let events = (0..vars)
            .map(|var| Event { id: var, kind: EventKind::Init, thread: None, var, value: Value::Init })
            .collect();
        ExecutionGraph { events, vars, po: BTreeSet::new(), rf: BTreeSet::new(), co: BTreeSet::new() }
    }

    /// Assembles a graph from raw relations, checking only shape: event ids
    /// are positions, initial writes come first, `rf` maps each read to one
    /// write with the same variable, `co` relates writes on one variable and
    /// `po` relates events of one thread.
    pub fn from_parts(
        events: Vec<Event>,
        po: impl IntoIterator<Item = (usize, usize)>,
        rf: impl IntoIterator<Item = (usize, usize)>,
        co: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let bad = |s: String| Err(GraphError::Malformed(s));
        let vars = events.iter().take_while(|e| e.kind == EventKind::Init).count();
        for (i, e) in events.iter().enumerate() {
            if e.id != i {
                return bad(format!("event at position {i} has id {}", e.id));
            }
            if e.var >= vars {
                return bad(format!("event {i} uses variable {} without an initial write", e.var));
            }
            if (e.kind == EventKind::Init) != (i < vars) || (e.kind == EventKind::Init) != e.thread.is_none() {
                return bad(format!("event {i} is misplaced or has the wrong thread"));
            }
            if i < vars && e.var != i {
                return bad(format!("initial write {i} is for variable {}", e.var));
            }
        }
        let g = ExecutionGraph {
            events,
            vars,
            po: po.into_iter().collect(),
            rf: rf.into_iter().collect(),
            co: co.into_iter().collect(),
        };
        let n = g.events.len();
        for &(a, b) in &g.po {
            if a >= n || b >= n || a == b || g.events[a].thread.is_none() || g.events[a].thread != g.events[b].thread {
                return bad(format!("po edge ({a}, {b})"));
            }
        }
        let mut sources = vec![0usize; n];
        for &(w, r) in &g.rf {
            if w >= n
                || r >= n
                || !g.events[w].is_write()
                || g.events[r].kind != EventKind::Read
                || g.events[w].var != g.events[r].var
            {
                return bad(format!("rf edge ({w}, {r})"));
            }
            sources[r] += 1;
        }
        for e in &g.events {
            if e.kind == EventKind::Read && sources[e.id] != 1 {
                return bad(format!("read {} has {} rf sources", e.id, sources[e.id]));
            }
        }
        for &(a, b) in &g.co {
            if a >= n
                || b >= n
                || a == b
                || !g.events[a].is_write()
                || !g.events[b].is_write()
                || g.events[a].var != g.events[b].var
            {
                return bad(format!("co edge ({a}, {b})"));
            }
        }
        Ok(g)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, id: usize) -> &Event {
        &self.events[id]
    }

    pub fn var_count(&self) -> usize {
        self.vars
    }

    pub fn po(&self) -> &BTreeSet<(usize, usize)> {
        &self.po
    }

    pub fn rf(&self) -> &BTreeSet<(usize, usize)> {
        &self.rf
    }

    pub fn co(&self) -> &BTreeSet<(usize, usize)> {
        &self.co
    }

    pub fn init_event(&self, var: usize) -> usize {
        var
    }

    pub fn rf_source(&self, read: usize) -> Option<usize> {
        self.rf.iter().find(|&&(_, r)| r == read).map(|&(w, _)| w)
    }

    fn push_event(&mut self, kind: EventKind, thread: usize, var: usize, value: Value) -> usize {
        let id = self.events.len();
        for e in &self.events {
            if e.thread == Some(thread) {
                self.po.insert((e.id, id));
            }
        }
        self.events.push(Event { id, kind, thread: Some(thread), var, value });
        id
    }

    /// Appends a write; its value must not be written yet.
    pub fn add_write(&mut self, thread: usize, var: usize, value: Value) -> Result<usize, GraphError> {
        if var >= self.vars {
            return Err(GraphError::UnknownVar(var));
        }
        if value == Value::Init || self.events.iter().any(|e| e.kind == EventKind::Write && e.value == value) {
            return Err(GraphError::DuplicateValue(value));
        }
        Ok(self.push_event(EventKind::Write, thread, var, value))
    }

    /// Appends a read of `value` on `var`, binding `rf` to the unique write of
    /// that value (the initial write for `Init`), and orders before that
    /// write every other write on `var` that happens before the new read.
    pub fn add_read(&mut self, thread: usize, var: usize, value: Value) -> Result<usize, GraphError> {
        if var >= self.vars {
            return Err(GraphError::UnknownVar(var));
        }
        let source = if value == Value::Init {
            self.init_event(var)
        } else {
            let mut matches =
                self.events.iter().filter(|e| e.kind == EventKind::Write && e.var == var && e.value == value);
            let first = matches.next().ok_or(GraphError::NoMatchingWrite { var, value })?.id;
            if matches.next().is_some() {
                return Err(GraphError::Ambiguous { var, value });
            }
            first
        };
        let read = self.push_event(EventKind::Read, thread, var, value);
        self.rf.insert((source, read));
        let before = self.hb_predecessors(read);
        for e in before.ones() {
            let ev = &self.events[e];
            if ev.kind == EventKind::Write && ev.var == var && e != source {
                self.co.insert((e, source));
            }
        }
        Ok(read)
    }

    /// Events with a `po ∪ rf` path to `target`.
    pub fn hb_predecessors(&self, target: usize) -> FixedBitSet {
        let n = self.events.len();
        let mut preds = vec![Vec::new(); n];
        for &(a, b) in self.po.iter().chain(&self.rf) {
            preds[b].push(a);
        }
        let mut seen = FixedBitSet::with_capacity(n);
        let mut queue = VecDeque::from([target]);
        while let Some(e) = queue.pop_front() {
            for &p in &preds[e] {
                if !seen.contains(p) {
                    seen.insert(p);
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// The transitive closure of `po ∪ rf`.
    pub fn hb(&self) -> BTreeSet<(usize, usize)> {
        let reach = check::reachability(self.events.len(), self.po.iter().chain(&self.rf).copied());
        let mut out = BTreeSet::new();
        for (a, row) in reach.iter().enumerate() {
            for b in row.ones() {
                out.insert((a, b));
            }
        }
        out
    }

    /// Writes on `var`, including its initial write.
    pub fn writes_on(&self, var: usize) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.is_write() && e.var == var)
    }
}

/// Folds a machine run into its execution graph; copies add nothing.
pub fn graph_of_run(run: &Run, m: &RegisterMachine) -> Result<ExecutionGraph, GraphError> {
    let mut g = ExecutionGraph::init_graph(m.vars.len());
    for s in &run.steps {
        match m.transitions[s.transition].op {
            Op::Write { thread, var, .. } => {
                g.add_write(thread, var, s.observed.expect("write observes its token"))?;
            }
            Op::Read { thread, var, .. } => {
                g.add_read(thread, var, s.observed.expect("read observes a value"))?;
            }
            Op::Copy { .. } => {}
        }
    }
    Ok(g)
}

/// Builds the graph of a standalone trace. Threads and variables are
/// numbered in order of first appearance; value 0 reads the initial write.
pub fn graph_of_trace(trace: &Trace) -> Result<(ExecutionGraph, Vec<String>, Vec<String>), GraphError> {
    let (threads, vars) = trace.symbols();
    let index = |table: &[String], name: &str| table.iter().position(|n| n == name).unwrap();
    let mut g = ExecutionGraph::init_graph(vars.len());
    for s in &trace.steps {
        match s {
            TraceStep::Write { thread, var, value, .. } => {
                g.add_write(index(&threads, thread), index(&vars, var), literal_value(*value)?)?;
            }
            TraceStep::Read { thread, var, value, .. } => {
                g.add_read(index(&threads, thread), index(&vars, var), literal_value(*value)?)?;
            }
            TraceStep::Copy { .. } => {}
        }
    }
    Ok((g, threads, vars))
}

fn literal_value(v: u64) -> Result<Value, GraphError> {
    if v == 0 {
        return Ok(Value::Init);
    }
    u32::try_from(v).map(Value::Token).map_err(|_| GraphError::Malformed(format!("value {v} out of range")))
}
