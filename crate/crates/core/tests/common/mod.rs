#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::Rng;
use rmv::egraph::{Event, EventKind, ExecutionGraph};
use rmv::machine::{MachineBuilder, RegisterMachine, Run, TokenSupply, Value};

/// Random machine over threads `t0, t1`, vars `x0, x1`, regs `r0..r2`.
pub fn random_machine(rng: &mut StdRng, max_states: usize, max_transitions: usize) -> RegisterMachine {
    let mut b = MachineBuilder::new("random");
    for t in ["t0", "t1"] {
        b.thread(t);
    }
    for x in ["x0", "x1"] {
        b.var(x);
    }
    for r in ["r0", "r1", "r2"] {
        b.reg(r);
    }
    b.initial("q0");
    let states = rng.gen_range(1..=max_states);
    let count = rng.gen_range(1..=max_transitions);
    for _ in 0..count {
        let from = format!("q{}", rng.gen_range(0..states));
        let to = format!("q{}", rng.gen_range(0..states));
        let t = format!("t{}", rng.gen_range(0..2));
        let x = format!("x{}", rng.gen_range(0..2));
        let r = format!("r{}", rng.gen_range(0..3));
        match rng.gen_range(0..5) {
            0 | 1 => b.write(&from, &to, &t, &x, &r),
            2 | 3 => b.read(&from, &to, &t, &x, &r),
            _ => b.copy(&from, &to, &r, &format!("r{}", rng.gen_range(0..3))),
        };
    }
    b.build()
}

/// Random walk of at most `len` steps.
pub fn random_run(rng: &mut StdRng, m: &RegisterMachine, len: usize) -> Run {
    let mut c = m.initial_configuration();
    let mut fresh = TokenSupply::new();
    let mut trace = Vec::new();
    for _ in 0..len {
        let enabled = m.enabled(&c);
        if enabled.is_empty() {
            break;
        }
        let t = enabled[rng.gen_range(0..enabled.len())];
        trace.push(t.index);
        c = m.step(&c, t, &mut fresh).0;
    }
    m.execute(&trace).unwrap()
}

/// Random well-shaped graph: per-thread transitive po, one rf source per
/// read, and arbitrary co pairs between same-variable writes.
pub fn random_graph(rng: &mut StdRng, events: usize, threads: usize, vars: usize) -> ExecutionGraph {
    let mut evs: Vec<Event> =
        (0..vars).map(|v| Event { id: v, kind: EventKind::Init, thread: None, var: v, value: Value::Init }).collect();
    let mut token = 1;
    for id in vars..vars + events {
        let write = rng.gen_bool(0.5);
        let kind = if write { EventKind::Write } else { EventKind::Read };
        let value = if write {
            token += 1;
            Value::Token(token - 1)
        } else {
            Value::Init
        };
        evs.push(Event { id, kind, thread: Some(rng.gen_range(0..threads)), var: rng.gen_range(0..vars), value });
    }
    let mut po = BTreeSet::new();
    for a in vars..evs.len() {
        for b in a + 1..evs.len() {
            if evs[a].thread == evs[b].thread {
                po.insert((a, b));
            }
        }
    }
    let mut rf = Vec::new();
    for r in vars..evs.len() {
        if evs[r].kind == EventKind::Read {
            let sources: Vec<usize> =
                (0..evs.len()).filter(|&w| evs[w].is_write() && evs[w].var == evs[r].var).collect();
            let w = sources[rng.gen_range(0..sources.len())];
            rf.push((w, r));
            evs[r].value = evs[w].value;
        }
    }
    let mut co = BTreeSet::new();
    for a in vars..evs.len() {
        for b in vars..evs.len() {
            if a != b
                && evs[a].kind == EventKind::Write
                && evs[b].kind == EventKind::Write
                && evs[a].var == evs[b].var
                && rng.gen_bool(0.3)
            {
                co.insert((a, b));
            }
        }
    }
    ExecutionGraph::from_parts(evs, po, rf, co).unwrap()
}
