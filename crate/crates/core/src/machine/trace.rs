use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{Configuration, Op, RegisterMachine, Run, RunStep, Value};

/// One line of a trace file. Values are the integer literals of the file,
/// with 0 standing for the initial value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStep {
    Write { thread: String, var: String, reg: String, value: u64 },
    Read { thread: String, var: String, reg: String, value: u64 },
    Copy { dst: String, src: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace is not valid UTF-8")]
    InvalidUtf8,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: write value {value} already used; traces must be differentiated")]
    DuplicateValue { line: usize, value: u64 },
    #[error("line {line}: write value 0 is reserved for the initial value")]
    ZeroWrite { line: usize },
    #[error("step {step}: `{text}` is not enabled in any reachable state")]
    NotEnabled { step: usize, text: String },
    #[error("step {step}: register `{reg}` holds {held}, but the trace reads {read}")]
    WrongValue { step: usize, reg: String, held: u64, read: u64 },
    #[error("step {step}: unknown {what} `{name}`")]
    Unknown { step: usize, what: &'static str, name: String },
}

/// Parses `W THREAD VAR REG VALUE`, `R THREAD VAR REG VALUE` and
/// `C DSTREG SRCREG` lines. `#` comments and blank lines are ignored.
/// Write values must be distinct and nonzero.
pub fn parse_trace(text: &[u8]) -> Result<Trace, TraceError> {
    let text = std::str::from_utf8(text).map_err(|_| TraceError::InvalidUtf8)?;
    let mut steps = Vec::new();
    let mut written = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = body.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let syntax = |message: String| TraceError::Syntax { line, message };
        for w in &words[1..] {
            let ident = w.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && w.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            let number = w.chars().all(|c| c.is_ascii_digit());
            if !ident && !number {
                return Err(syntax(format!("malformed token `{w}`")));
            }
        }
        let value = |w: &str| w.parse::<u64>().map_err(|_| syntax(format!("expected an integer value, found `{w}`")));
        let step = match (words[0], words.len()) {
            ("W", 5) => {
                let v = value(words[4])?;
                if v == 0 {
                    return Err(TraceError::ZeroWrite { line });
                }
                if !written.insert(v) {
                    return Err(TraceError::DuplicateValue { line, value: v });
                }
                TraceStep::Write { thread: words[1].into(), var: words[2].into(), reg: words[3].into(), value: v }
            }
            ("R", 5) => TraceStep::Read {
                thread: words[1].into(),
                var: words[2].into(),
                reg: words[3].into(),
                value: value(words[4])?,
            },
            ("C", 3) => TraceStep::Copy { dst: words[1].into(), src: words[2].into() },
            ("W" | "R" | "C", n) => return Err(syntax(format!("wrong number of fields ({n}) for `{}`", words[0]))),
            (other, _) => return Err(syntax(format!("unknown step kind `{other}`"))),
        };
        steps.push(step);
    }
    Ok(Trace { steps })
}

impl TraceStep {
    pub fn text(&self) -> String {
        match self {
            TraceStep::Write { thread, var, reg, value } => format!("W {thread} {var} {reg} {value}"),
            TraceStep::Read { thread, var, reg, value } => format!("R {thread} {var} {reg} {value}"),
            TraceStep::Copy { dst, src } => format!("C {dst} {src}"),
        }
    }
}

impl Trace {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for step in &self.steps {
            s.push_str(&step.text());
            s.push('\n');
        }
        s
    }

    pub fn from_lines<S: AsRef<str>>(lines: &[S]) -> Result<Trace, TraceError> {
        let mut text = String::new();
        for l in lines {
            text.push_str(l.as_ref());
            text.push('\n');
        }
        parse_trace(text.as_bytes())
    }

    /// Threads and variables in order of first appearance.
    pub fn symbols(&self) -> (Vec<String>, Vec<String>) {
        let mut threads: Vec<String> = Vec::new();
        let mut vars: Vec<String> = Vec::new();
        for s in &self.steps {
            if let TraceStep::Write { thread, var, .. } | TraceStep::Read { thread, var, .. } = s {
                if !threads.contains(thread) {
                    threads.push(thread.clone());
                }
                if !vars.contains(var) {
                    vars.push(var.clone());
                }
            }
        }
        (threads, vars)
    }
}

impl RegisterMachine {
    /// Finds a run of the machine producing `trace`. Register contents must
    /// agree with the values the trace reads. Written literals are mapped to
    /// tokens 1, 2, ... in order of appearance.
    pub fn match_trace(&self, trace: &Trace) -> Result<Run, TraceError> {
        let find = |table: &[String], name: &str, step: usize, what: &'static str| {
            table.iter().position(|n| n == name).ok_or_else(|| TraceError::Unknown { step, what, name: name.into() })
        };
        let mut regvals = vec![Value::Init; self.regs.len()];
        let mut literals = vec![0u64; self.regs.len()];
        let mut next_token = 1u32;
        let mut frontier: Vec<usize> = vec![self.initial];
        // per step: state reached -> (previous state, transition)
        let mut back: Vec<HashMap<usize, (usize, usize)>> = Vec::new();
        let mut observed_per_step = Vec::new();

        for (step, ts) in trace.steps.iter().enumerate() {
            let op = match ts {
                TraceStep::Write { thread, var, reg, .. } | TraceStep::Read { thread, var, reg, .. } => {
                    let thread = find(&self.threads, thread, step, "thread")?;
                    let var = find(&self.vars, var, step, "variable")?;
                    let reg = find(&self.regs, reg, step, "register")?;
                    if matches!(ts, TraceStep::Write { .. }) {
                        Op::Write { thread, var, reg }
                    } else {
                        Op::Read { thread, var, reg }
                    }
                }
                TraceStep::Copy { dst, src } => Op::Copy {
                    dst: find(&self.regs, dst, step, "register")?,
                    src: find(&self.regs, src, step, "register")?,
                },
            };
            let mut next: HashMap<usize, (usize, usize)> = HashMap::new();
            for &q in &frontier {
                for t in self.transitions.iter().filter(|t| t.from == q && t.op == op) {
                    next.entry(t.to).or_insert((q, t.index));
                }
            }
            if next.is_empty() {
                return Err(TraceError::NotEnabled { step, text: ts.text() });
            }
            let observed = match (ts, op) {
                (TraceStep::Write { value, .. }, Op::Write { reg, .. }) => {
                    let v = Value::Token(next_token);
                    next_token += 1;
                    regvals[reg] = v;
                    literals[reg] = *value;
                    Some(v)
                }
                (TraceStep::Read { value, reg: name, .. }, Op::Read { reg, .. }) => {
                    let held = regvals[reg];
                    let literal = literals[reg];
                    if literal != *value {
                        return Err(TraceError::WrongValue { step, reg: name.clone(), held: literal, read: *value });
                    }
                    Some(held)
                }
                (_, Op::Copy { dst, src }) => {
                    regvals[dst] = regvals[src];
                    literals[dst] = literals[src];
                    None
                }
                _ => unreachable!(),
            };
            observed_per_step.push(observed);
            let mut states: Vec<usize> = next.keys().copied().collect();
            states.sort_unstable();
            frontier = states;
            back.push(next);
        }

        // Walk back from the smallest final state.
        let mut path = Vec::with_capacity(trace.steps.len());
        let mut q = frontier.first().copied().unwrap_or(self.initial);
        for step in (0..back.len()).rev() {
            let (prev, t) = back[step][&q];
            path.push(t);
            q = prev;
        }
        path.reverse();

        let mut config = self.initial_configuration();
        let mut steps = Vec::with_capacity(path.len());
        for (i, &t) in path.iter().enumerate() {
            let tr = &self.transitions[t];
            let mut regs = config.regvals.clone();
            match tr.op {
                Op::Write { reg, .. } => regs[reg] = observed_per_step[i].unwrap(),
                Op::Copy { dst, src } => regs[dst] = regs[src],
                Op::Read { .. } => {}
            }
            let after = Configuration { state: tr.to, regvals: regs };
            steps.push(RunStep { before: config, transition: t, observed: observed_per_step[i], after: after.clone() });
            config = after;
        }
        Ok(Run { steps })
    }
}
