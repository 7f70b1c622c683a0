//! Polynomial-time WRA verification by backward saturation.
//!
//! A machine satisfies WRA iff three independent stages pass:
//!
//! * **ghost**: no run outputs a register that was never written or copied
//!   into since the start;
//! * **mismatch**: no run outputs on `x` a value that was input on `y ≠ x`;
//! * **hidden**: no run has a read `r` of a value written by `w'` while a
//!   later write `w` on the same variable happens before `r`.
//!
//! Each stage derives facts backwards from read transitions until a fixed
//! point is reached or a failure is flagged. Facts remember the first rule
//! and premise that produced them, which yields a derivation for failures.

mod engine;
mod explain;

use std::fmt;

use serde::Serialize;

use crate::machine::{Op, RegisterMachine};
use engine::{Conclusion, Engine};

pub use explain::{explain, Diagnostic, ExplainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ghost,
    Mismatch,
    Hidden,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Ghost, Stage::Mismatch, Stage::Hidden];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ghost => "ghost",
            Stage::Mismatch => "mismatch",
            Stage::Hidden => "hidden",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rule number within its stage; `primed` distinguishes read transparency
/// (8′) from write transparency (8) in the hidden stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub number: u8,
    pub primed: bool,
}

impl Rule {
    pub const fn n(number: u8) -> Rule {
        Rule { number, primed: false }
    }

    pub fn circled(self) -> String {
        let c = char::from_u32(0x2460 + u32::from(self.number) - 1).unwrap_or('?');
        if self.primed {
            format!("{c}′")
        } else {
            c.to_string()
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.number, if self.primed { "'" } else { "" })
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tracker {
    Thread(usize),
    Reg(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Status {
    Visible,
    Hidden,
}

/// A fact attached to a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fact {
    /// Some run from here outputs the current content of `reg`.
    Ghost { reg: usize },
    /// Some run from here outputs the current content of `reg` on `var`.
    Mismatch { reg: usize, var: usize },
    /// Some run from here ends in a read on `var` outputting the content of
    /// `watched`; `tracker` is a thread or register that must happen before
    /// that read. `Hidden` marks that a write on `var` intervenes.
    Hidden { watched: usize, tracker: Tracker, var: usize, status: Status },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateFact {
    pub state: usize,
    pub fact: Fact,
}

impl StateFact {
    pub fn render(&self, m: &RegisterMachine) -> String {
        let q = &m.states[self.state];
        match self.fact {
            Fact::Ghost { reg } => format!("{} ∈ regs({q})", m.regs[reg]),
            Fact::Mismatch { reg, var } => format!("({}, {}) ∈ regs({q})", m.regs[reg], m.vars[var]),
            Fact::Hidden { watched, tracker, var, status } => {
                let t = match tracker {
                    Tracker::Thread(t) => &m.threads[t],
                    Tracker::Reg(r) => &m.regs[r],
                };
                format!("{status:?}({q})⟨{}, {t}, {}⟩", m.regs[watched], m.vars[var])
            }
        }
    }
}

/// One line of a linearized derivation. Premises are indices of earlier
/// steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    pub rule: Rule,
    pub transition: Option<usize>,
    pub premises: Vec<usize>,
    pub conclusion: Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derived {
    Fact(StateFact),
    Fail { state: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageVerdict {
    pub stage: Stage,
    /// Facts derived before the stage stopped, sorted.
    pub facts: Vec<StateFact>,
    /// Derivation ending in the failure; `None` when the stage passes.
    pub failure: Option<Vec<DerivationStep>>,
}

impl StageVerdict {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn facts_count(&self) -> usize {
        self.facts.len()
    }

    /// State at which the failure was flagged.
    pub fn failed_at(&self) -> Option<usize> {
        match self.failure.as_ref()?.last()?.conclusion {
            Derived::Fail { state } => Some(state),
            Derived::Fact(_) => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SaturationOptions {
    /// Permutation of transition indices to iterate in; declaration order
    /// when `None`.
    pub transition_order: Option<Vec<usize>>,
    /// Process the worklist as a stack instead of a queue.
    pub lifo: bool,
    /// Keep saturating after a failure is flagged.
    pub full_fixpoint: bool,
}

/// `2·|Q|·|X|·|R|·(|Θ|+|R|)`: the number of distinct hidden-stage facts.
pub fn hidden_fact_bound(m: &RegisterMachine) -> usize {
    2 * m.states.len() * m.vars.len() * m.regs.len() * (m.threads.len() + m.regs.len())
}

fn finish<F: Copy>(stage: Stage, e: Engine<'_, F>, wrap: impl Fn(F) -> Fact) -> StageVerdict {
    let lift = |i: usize| StateFact { state: e.facts[i].0, fact: wrap(e.facts[i].1) };
    let mut facts: Vec<StateFact> = (0..e.facts.len()).map(lift).collect();
    facts.sort_unstable();
    let failure = e.failure.as_ref().map(|f| {
        let mut chain = vec![f.premise];
        while let Some(p) = e.origins[*chain.last().unwrap()].premise {
            chain.push(p);
        }
        chain.reverse();
        let mut steps: Vec<DerivationStep> = chain
            .iter()
            .enumerate()
            .map(|(i, &id)| DerivationStep {
                rule: e.origins[id].rule,
                transition: e.origins[id].transition,
                premises: if i == 0 { vec![] } else { vec![i - 1] },
                conclusion: Derived::Fact(lift(id)),
            })
            .collect();
        steps.push(DerivationStep {
            rule: f.rule,
            transition: f.transition,
            premises: vec![steps.len() - 1],
            conclusion: Derived::Fail { state: f.state },
        });
        steps
    });
    StageVerdict { stage, facts, failure }
}

/// New register holding a value after crossing `C(dst, src)` backwards,
/// with the rule that justifies it: 3 (src stays), 4 (dst becomes src) or
/// 7 (untouched).
fn copy_back(reg: usize, dst: usize, src: usize) -> (Rule, usize) {
    if reg == dst {
        (Rule::n(4), src)
    } else if reg == src {
        (Rule::n(3), reg)
    } else {
        (Rule::n(7), reg)
    }
}

fn seeds<F: Copy>(e: &mut Engine<'_, F>, seed: impl Fn(usize, usize, usize, usize) -> F) {
    let reads: Vec<_> = e
        .transitions()
        .filter_map(|t| match t.op {
            Op::Read { thread, var, reg } => Some((t.index, t.from, seed(t.from, thread, var, reg))),
            _ => None,
        })
        .collect();
    for (index, from, fact) in reads {
        e.add(
            Conclusion::Fact(from, fact),
            engine::Origin { rule: Rule::n(1), transition: Some(index), premise: None },
        );
    }
}

pub fn check_ghost_reads(m: &RegisterMachine) -> StageVerdict {
    check_ghost_reads_with(m, &SaturationOptions::default())
}

pub fn check_ghost_reads_with(m: &RegisterMachine, opts: &SaturationOptions) -> StageVerdict {
    let regs = m.regs.len();
    let mut e = Engine::new(m, m.states.len() * regs, move |q, &r: &usize| q * regs + r, opts);
    seeds(&mut e, |_, _, _, reg| reg);
    let initial = m.initial;
    e.saturate(
        |t, _, &a, out| match t.op {
            Op::Read { .. } => out.push((Rule::n(5), Conclusion::Fact(t.from, a))),
            Op::Write { reg, .. } => {
                if reg != a {
                    out.push((Rule::n(6), Conclusion::Fact(t.from, a)));
                }
            }
            Op::Copy { dst, src } => {
                let (rule, b) = copy_back(a, dst, src);
                out.push((rule, Conclusion::Fact(t.from, b)));
            }
        },
        |q, _| (q == initial).then_some(Rule::n(2)),
    );
    finish(Stage::Ghost, e, |reg| Fact::Ghost { reg })
}

pub fn check_mismatched_vars(m: &RegisterMachine) -> StageVerdict {
    check_mismatched_vars_with(m, &SaturationOptions::default())
}

pub fn check_mismatched_vars_with(m: &RegisterMachine, opts: &SaturationOptions) -> StageVerdict {
    let (regs, vars) = (m.regs.len(), m.vars.len());
    let cap = m.states.len() * regs * vars;
    let mut e = Engine::new(m, cap, move |q, &(r, x): &(usize, usize)| (q * regs + r) * vars + x, opts);
    seeds(&mut e, |_, _, var, reg| (reg, var));
    e.saturate(
        |t, _, &(a, x), out| match t.op {
            Op::Read { .. } => out.push((Rule::n(5), Conclusion::Fact(t.from, (a, x)))),
            Op::Write { reg, var, .. } => {
                if reg != a {
                    out.push((Rule::n(6), Conclusion::Fact(t.from, (a, x))));
                } else if var != x {
                    out.push((Rule::n(2), Conclusion::Fail(t.from)));
                }
            }
            Op::Copy { dst, src } => {
                let (rule, b) = copy_back(a, dst, src);
                out.push((rule, Conclusion::Fact(t.from, (b, x))));
            }
        },
        |_, _| None,
    );
    finish(Stage::Mismatch, e, |(reg, var)| Fact::Mismatch { reg, var })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct HFact {
    watched: usize,
    tracker: Tracker,
    var: usize,
    status: Status,
}

pub fn check_hidden_reads(m: &RegisterMachine) -> StageVerdict {
    check_hidden_reads_with(m, &SaturationOptions::default())
}

pub fn check_hidden_reads_with(m: &RegisterMachine, opts: &SaturationOptions) -> StageVerdict {
    let (regs, vars, threads) = (m.regs.len(), m.vars.len(), m.threads.len());
    let index = move |q: usize, f: &HFact| {
        let status = usize::from(f.status == Status::Hidden);
        let tracker = match f.tracker {
            Tracker::Thread(t) => t,
            Tracker::Reg(r) => threads + r,
        };
        ((((q * 2 + status) * vars + f.var) * regs + f.watched) * (threads + regs)) + tracker
    };
    let mut e = Engine::new(m, hidden_fact_bound(m), index, opts);
    seeds(&mut e, |_, thread, var, reg| HFact {
        watched: reg,
        tracker: Tracker::Thread(thread),
        var,
        status: Status::Visible,
    });
    e.saturate(hidden_rules, |_, _| None);
    finish(Stage::Hidden, e, |f| Fact::Hidden { watched: f.watched, tracker: f.tracker, var: f.var, status: f.status })
}

/// Conclusions at `t.from` of the premise `f` holding at `t.to`.
fn hidden_rules(t: &crate::machine::Transition, _: usize, f: &HFact, out: &mut Vec<(Rule, Conclusion<HFact>)>) {
    let HFact { watched: a, tracker, var: x, status } = *f;
    let q0 = t.from;
    let fact = |tracker, status| Conclusion::Fact(q0, HFact { watched: a, tracker, var: x, status });
    match t.op {
        Op::Read { thread, var: y, reg: b } => {
            out.push((Rule { number: 8, primed: true }, Conclusion::Fact(q0, *f)));
            if tracker == Tracker::Thread(thread) {
                if b != a {
                    let rule = if y != x { 2 } else { 5 };
                    out.push((Rule::n(rule), fact(Tracker::Reg(b), status)));
                } else if y == x && status == Status::Hidden {
                    out.push((Rule::n(6), fact(Tracker::Reg(a), Status::Hidden)));
                }
            }
        }
        Op::Write { thread, var: y, reg: c } => {
            let by_thread_or_reg = |r: usize| tracker == Tracker::Thread(thread) || tracker == Tracker::Reg(r);
            if c != a && tracker != Tracker::Reg(c) {
                out.push((Rule::n(8), Conclusion::Fact(q0, *f)));
            }
            if tracker == Tracker::Reg(c) && y != x && c != a {
                out.push((Rule::n(3), fact(Tracker::Thread(thread), status)));
            }
            if y == x && c != a && by_thread_or_reg(c) {
                out.push((Rule::n(4), fact(Tracker::Thread(thread), Status::Hidden)));
            }
            if y == x && c == a && status == Status::Hidden && by_thread_or_reg(a) {
                out.push((Rule::n(7), Conclusion::Fail(q0)));
            }
        }
        Op::Copy { dst, src } => {
            let sub = |r: usize| if r == dst { src } else { r };
            let watched = sub(a);
            let tracker = match tracker {
                Tracker::Reg(r) => Tracker::Reg(sub(r)),
                th => th,
            };
            if tracker == Tracker::Reg(watched) && status == Status::Visible {
                return;
            }
            out.push((Rule::n(9), Conclusion::Fact(q0, HFact { watched, tracker, var: x, status })));
        }
    }
}

/// Outcome of the three stages on a pruned machine, reported against the
/// original machine's states and transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WraVerdict {
    /// Stages that ran, in order; the last one failed unless all passed.
    pub stages: Vec<StageVerdict>,
}

impl WraVerdict {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(StageVerdict::passed)
    }

    pub fn failed_stage(&self) -> Option<&StageVerdict> {
        self.stages.iter().find(|s| !s.passed())
    }
}

pub fn verify_wra(m: &RegisterMachine) -> WraVerdict {
    verify_wra_with(m, &SaturationOptions::default())
}

/// Prunes unreachable states, then runs ghost, mismatch and hidden stages
/// until one fails.
pub fn verify_wra_with(m: &RegisterMachine, opts: &SaturationOptions) -> WraVerdict {
    let (pruned, origin) = m.prune_with_map();
    let state_origin: Vec<usize> =
        pruned.states.iter().map(|name| m.states.iter().position(|n| n == name).unwrap()).collect();
    let opts = SaturationOptions {
        transition_order: opts
            .transition_order
            .as_ref()
            .map(|order| order.iter().filter_map(|&i| origin.iter().position(|&o| o == i)).collect()),
        ..opts.clone()
    };
    let mut stages = Vec::new();
    for stage in Stage::ALL {
        let mut v = match stage {
            Stage::Ghost => check_ghost_reads_with(&pruned, &opts),
            Stage::Mismatch => check_mismatched_vars_with(&pruned, &opts),
            Stage::Hidden => check_hidden_reads_with(&pruned, &opts),
        };
        remap(&mut v, &state_origin, &origin);
        let failed = !v.passed();
        stages.push(v);
        if failed {
            break;
        }
    }
    WraVerdict { stages }
}

fn remap(v: &mut StageVerdict, states: &[usize], transitions: &[usize]) {
    for f in &mut v.facts {
        f.state = states[f.state];
    }
    v.facts.sort_unstable();
    for step in v.failure.iter_mut().flatten() {
        step.transition = step.transition.map(|t| transitions[t]);
        match &mut step.conclusion {
            Derived::Fact(f) => f.state = states[f.state],
            Derived::Fail { state } => *state = states[*state],
        }
    }
}
