//! Register machines and their operational semantics.
//!
//! A machine is a finite control graph whose transitions accept write
//! requests (storing the written value in a register), answer read requests
//! (returning a register's content) or copy one register into another.
//! Values are symbolic: every write mints a fresh [`Value::Token`], and
//! registers start out holding [`Value::Init`].

mod parse;
mod trace;

use std::collections::VecDeque;
use std::fmt;

pub use parse::{parse_machine, ParseError, ParseErrorKind};
pub use trace::{parse_trace, Trace, TraceError, TraceStep};

/// Operation carried by a transition. Indices refer to the machine's
/// thread, variable and register tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Write {
        thread: usize,
        var: usize,
        reg: usize,
    },
    Read {
        thread: usize,
        var: usize,
        reg: usize,
    },
    /// `dst := src`
    Copy {
        dst: usize,
        src: usize,
    },
}

impl Op {
    pub fn thread(&self) -> Option<usize> {
        match *self {
            Op::Write { thread, .. } | Op::Read { thread, .. } => Some(thread),
            Op::Copy { .. } => None,
        }
    }

    pub fn var(&self) -> Option<usize> {
        match *self {
            Op::Write { var, .. } | Op::Read { var, .. } => Some(var),
            Op::Copy { .. } => None,
        }
    }

    pub fn is_read(&self) -> bool {
        matches!(self, Op::Read { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    /// Position in declaration order.
    pub index: usize,
    pub from: usize,
    pub to: usize,
    pub op: Op,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterMachine {
    pub name: String,
    pub threads: Vec<String>,
    pub vars: Vec<String>,
    pub regs: Vec<String>,
    pub states: Vec<String>,
    pub initial: usize,
    pub transitions: Vec<Transition>,
}

/// Symbolic register content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Init,
    Token(u32),
}

impl Value {
    /// Integer literal used by the trace format; `Init` is 0.
    pub fn literal(self) -> u64 {
        match self {
            Value::Init => 0,
            Value::Token(t) => u64::from(t),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.literal())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: usize,
    pub regvals: Vec<Value>,
}

/// Mints write tokens 1, 2, 3, ...
#[derive(Debug, Clone)]
pub struct TokenSupply {
    next: u32,
}

impl TokenSupply {
    pub fn new() -> Self {
        TokenSupply { next: 1 }
    }

    pub fn fresh(&mut self) -> Value {
        let v = Value::Token(self.next);
        self.next += 1;
        v
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

impl Default for TokenSupply {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunStep {
    pub before: Configuration,
    pub transition: usize,
    /// Token written or read; `None` for copies.
    pub observed: Option<Value>,
    pub after: Configuration,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Run {
    pub steps: Vec<RunStep>,
}

impl Run {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn transitions(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.transition).collect()
    }

    /// The run in the line-oriented trace format, one step per line.
    pub fn trace_lines(&self, m: &RegisterMachine) -> Vec<String> {
        self.steps
            .iter()
            .map(|s| {
                let t = &m.transitions[s.transition];
                let value = s.observed.map(Value::literal).unwrap_or(0);
                match t.op {
                    Op::Write { thread, var, reg } => {
                        format!("W {} {} {} {}", m.threads[thread], m.vars[var], m.regs[reg], value)
                    }
                    Op::Read { thread, var, reg } => {
                        format!("R {} {} {} {}", m.threads[thread], m.vars[var], m.regs[reg], value)
                    }
                    Op::Copy { dst, src } => format!("C {} {}", m.regs[dst], m.regs[src]),
                }
            })
            .collect()
    }

    /// Checks chaining, fresh write tokens and the per-operation rules.
    pub fn is_well_formed(&self, m: &RegisterMachine) -> bool {
        let mut expected = m.initial_configuration();
        let mut last_token = 0u32;
        for s in &self.steps {
            if s.before != expected {
                return false;
            }
            let Some(t) = m.transitions.get(s.transition) else {
                return false;
            };
            if t.from != s.before.state || t.to != s.after.state {
                return false;
            }
            let mut regs = s.before.regvals.clone();
            match t.op {
                Op::Write { reg, .. } => match s.observed {
                    Some(Value::Token(k)) if k > last_token => {
                        last_token = k;
                        regs[reg] = Value::Token(k);
                    }
                    _ => return false,
                },
                Op::Read { reg, .. } => {
                    if s.observed != Some(s.before.regvals[reg]) {
                        return false;
                    }
                }
                Op::Copy { dst, src } => {
                    if s.observed.is_some() {
                        return false;
                    }
                    regs[dst] = regs[src];
                }
            }
            if s.after.regvals != regs {
                return false;
            }
            expected = s.after.clone();
        }
        true
    }
}

/// Error from executing a sequence of transition indices.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("step {step}: no transition with index {index}")]
    UnknownTransition { step: usize, index: usize },
    #[error("step {step}: transition {index} does not leave state `{state}`")]
    BrokenChain { step: usize, index: usize, state: String },
}

impl RegisterMachine {
    pub fn initial_configuration(&self) -> Configuration {
        Configuration { state: self.initial, regvals: vec![Value::Init; self.regs.len()] }
    }

    /// Transitions leaving `c.state`, in declaration order.
    pub fn enabled(&self, c: &Configuration) -> Vec<&Transition> {
        self.transitions.iter().filter(|t| t.from == c.state).collect()
    }

    /// Fires `t` from `c`. Panics if `t` does not leave `c.state`.
    pub fn step(&self, c: &Configuration, t: &Transition, fresh: &mut TokenSupply) -> (Configuration, Option<Value>) {
        assert_eq!(t.from, c.state, "transition {} not enabled", t.index);
        let mut regvals = c.regvals.clone();
        let observed = match t.op {
            Op::Write { reg, .. } => {
                let v = fresh.fresh();
                regvals[reg] = v;
                Some(v)
            }
            Op::Read { reg, .. } => Some(c.regvals[reg]),
            Op::Copy { dst, src } => {
                regvals[dst] = c.regvals[src];
                None
            }
        };
        (Configuration { state: t.to, regvals }, observed)
    }

    /// Executes transition indices from the initial configuration.
    pub fn execute(&self, trace: &[usize]) -> Result<Run, ReplayError> {
        let mut fresh = TokenSupply::new();
        let mut config = self.initial_configuration();
        let mut steps = Vec::with_capacity(trace.len());
        for (step, &index) in trace.iter().enumerate() {
            let t = self.transitions.get(index).ok_or(ReplayError::UnknownTransition { step, index })?;
            if t.from != config.state {
                return Err(ReplayError::BrokenChain { step, index, state: self.states[config.state].clone() });
            }
            let (after, observed) = self.step(&config, t, &mut fresh);
            steps.push(RunStep { before: config, transition: index, observed, after: after.clone() });
            config = after;
        }
        Ok(Run { steps })
    }

    /// Outgoing transition indices per state, declaration order.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for t in &self.transitions {
            out[t.from].push(t.index);
        }
        out
    }

    fn reachable(&self) -> Vec<bool> {
        let succ = self.successors();
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            for &i in &succ[q] {
                let to = self.transitions[i].to;
                if !seen[to] {
                    seen[to] = true;
                    queue.push_back(to);
                }
            }
        }
        seen
    }

    /// Drops states not reachable from the initial state, and their
    /// transitions. Transition indices are renumbered.
    pub fn prune_unreachable(&self) -> RegisterMachine {
        self.prune_with_map().0
    }

    /// Like [`prune_unreachable`](Self::prune_unreachable), also returning
    /// the original index of every kept transition.
    pub fn prune_with_map(&self) -> (RegisterMachine, Vec<usize>) {
        let keep = self.reachable();
        let mut remap = vec![usize::MAX; self.states.len()];
        let mut states = Vec::new();
        for (q, name) in self.states.iter().enumerate() {
            if keep[q] {
                remap[q] = states.len();
                states.push(name.clone());
            }
        }
        let mut transitions = Vec::new();
        let mut origin = Vec::new();
        for t in &self.transitions {
            if keep[t.from] {
                origin.push(t.index);
                transitions.push(Transition {
                    index: transitions.len(),
                    from: remap[t.from],
                    to: remap[t.to],
                    op: t.op,
                });
            }
        }
        let pruned = RegisterMachine {
            name: self.name.clone(),
            threads: self.threads.clone(),
            vars: self.vars.clone(),
            regs: self.regs.clone(),
            states,
            initial: remap[self.initial],
            transitions,
        };
        (pruned, origin)
    }

    pub fn is_acyclic(&self) -> bool {
        self.longest_path().is_some()
    }

    /// Length of the longest path from the initial state, or `None` when a
    /// cycle is reachable.
    pub fn longest_path(&self) -> Option<usize> {
        let succ = self.successors();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark = vec![0u8; self.states.len()];
        let mut best = vec![0usize; self.states.len()];
        let mut stack = vec![(self.initial, 0usize)];
        mark[self.initial] = 1;
        while let Some(&mut (q, ref mut next)) = stack.last_mut() {
            if let Some(&i) = succ[q].get(*next) {
                *next += 1;
                let to = self.transitions[i].to;
                match mark[to] {
                    0 => {
                        mark[to] = 1;
                        stack.push((to, 0));
                    }
                    1 => return None,
                    _ => {}
                }
            } else {
                best[q] = succ[q].iter().map(|&i| best[self.transitions[i].to] + 1).max().unwrap_or(0);
                mark[q] = 2;
                stack.pop();
            }
        }
        Some(best[self.initial])
    }

    /// Length of the longest simple path from the initial state, saturating
    /// at `limit`.
    pub fn longest_simple_path(&self, limit: usize) -> usize {
        fn go(
            m: &RegisterMachine,
            succ: &[Vec<usize>],
            q: usize,
            on_path: &mut [bool],
            len: usize,
            limit: usize,
            best: &mut usize,
        ) {
            *best = (*best).max(len);
            if *best >= limit {
                return;
            }
            for &i in &succ[q] {
                let to = m.transitions[i].to;
                if !on_path[to] {
                    on_path[to] = true;
                    go(m, succ, to, on_path, len + 1, limit, best);
                    on_path[to] = false;
                }
            }
        }
        let succ = self.successors();
        let mut on_path = vec![false; self.states.len()];
        on_path[self.initial] = true;
        let mut best = 0;
        go(self, &succ, self.initial, &mut on_path, 0, limit, &mut best);
        best.min(limit)
    }

    /// Requests a reactive machine would have to accept: for every state,
    /// the (thread, variable) pairs lacking a write or a read transition.
    pub fn reactivity_gaps(&self) -> Vec<ReactivityGap> {
        let mut gaps = Vec::new();
        let succ = self.successors();
        for (q, out) in succ.iter().enumerate() {
            for thread in 0..self.threads.len() {
                for var in 0..self.vars.len() {
                    let (mut w, mut r) = (false, false);
                    for &i in out {
                        match self.transitions[i].op {
                            Op::Write { thread: t, var: x, .. } if t == thread && x == var => w = true,
                            Op::Read { thread: t, var: x, .. } if t == thread && x == var => r = true,
                            _ => {}
                        }
                    }
                    if !w {
                        gaps.push(ReactivityGap { state: q, thread, var, write: true });
                    }
                    if !r {
                        gaps.push(ReactivityGap { state: q, thread, var, write: false });
                    }
                }
            }
        }
        gaps
    }

    pub fn describe(&self, t: &Transition) -> String {
        format!("{} -> {} : {}", self.states[t.from], self.states[t.to], self.op_text(&t.op))
    }

    pub fn op_text(&self, op: &Op) -> String {
        match *op {
            Op::Write { thread, var, reg } => {
                format!("W({}, {}, {})", self.threads[thread], self.vars[var], self.regs[reg])
            }
            Op::Read { thread, var, reg } => {
                format!("R({}, {}, {})", self.threads[thread], self.vars[var], self.regs[reg])
            }
            Op::Copy { dst, src } => format!("C({}, {})", self.regs[dst], self.regs[src]),
        }
    }

    /// Text in the machine file format; parses back to an equal machine.
    pub fn print(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("machine {}\n", self.name));
        for (key, list) in
            [("threads", &self.threads), ("vars", &self.vars), ("regs", &self.regs), ("states", &self.states)]
        {
            if !list.is_empty() {
                out.push_str(key);
                for id in list {
                    out.push(' ');
                    out.push_str(id);
                }
                out.push('\n');
            }
        }
        out.push_str(&format!("init {}\n", self.states[self.initial]));
        for t in &self.transitions {
            out.push_str(&self.describe(t));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for RegisterMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReactivityGap {
    pub state: usize,
    pub thread: usize,
    pub var: usize,
    /// `true` for a missing write request, `false` for a missing read.
    pub write: bool,
}

/// Builds machines by name, interning identifiers in order of first use.
#[derive(Debug, Clone)]
pub struct MachineBuilder {
    m: RegisterMachine,
    initial_set: bool,
}

fn intern(table: &mut Vec<String>, name: &str) -> usize {
    match table.iter().position(|n| n == name) {
        Some(i) => i,
        None => {
            table.push(name.to_string());
            table.len() - 1
        }
    }
}

impl MachineBuilder {
    pub fn new(name: &str) -> Self {
        MachineBuilder {
            m: RegisterMachine {
                name: name.to_string(),
                threads: Vec::new(),
                vars: Vec::new(),
                regs: Vec::new(),
                states: Vec::new(),
                initial: 0,
                transitions: Vec::new(),
            },
            initial_set: false,
        }
    }

    pub fn thread(&mut self, name: &str) -> usize {
        intern(&mut self.m.threads, name)
    }

    pub fn var(&mut self, name: &str) -> usize {
        intern(&mut self.m.vars, name)
    }

    pub fn reg(&mut self, name: &str) -> usize {
        intern(&mut self.m.regs, name)
    }

    pub fn state(&mut self, name: &str) -> usize {
        intern(&mut self.m.states, name)
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        self.m.initial = self.state(name);
        self.initial_set = true;
        self
    }

    fn push(&mut self, from: &str, to: &str, op: Op) -> &mut Self {
        let from = self.state(from);
        let to = self.state(to);
        let index = self.m.transitions.len();
        self.m.transitions.push(Transition { index, from, to, op });
        self
    }

    pub fn write(&mut self, from: &str, to: &str, thread: &str, var: &str, reg: &str) -> &mut Self {
        let op = Op::Write { thread: self.thread(thread), var: self.var(var), reg: self.reg(reg) };
        self.push(from, to, op)
    }

    pub fn read(&mut self, from: &str, to: &str, thread: &str, var: &str, reg: &str) -> &mut Self {
        let op = Op::Read { thread: self.thread(thread), var: self.var(var), reg: self.reg(reg) };
        self.push(from, to, op)
    }

    pub fn copy(&mut self, from: &str, to: &str, dst: &str, src: &str) -> &mut Self {
        let op = Op::Copy { dst: self.reg(dst), src: self.reg(src) };
        self.push(from, to, op)
    }

    /// Finishes the machine. Without an explicit initial state the first
    /// state mentioned is initial; a machine with no states gets `q0`.
    pub fn build(&self) -> RegisterMachine {
        let mut m = self.m.clone();
        if m.states.is_empty() {
            m.states.push("q0".to_string());
        }
        if !self.initial_set {
            m.initial = 0;
        }
        m
    }
}
