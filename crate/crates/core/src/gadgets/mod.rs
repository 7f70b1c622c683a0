//! Machines compiled from Boolean formulas, whose RA violations encode
//! non-tautology (DNF) or satisfiability (CNF), plus the litmus corpus.
//!
//! A gadget has three phases joined by padding transitions:
//!
//! 1. per clause `i`, thread `t_i` writes `x` into `b_{i-1 mod n}`, then
//!    into `a_i`;
//! 2. per formula variable, a diamond whose branches copy `a_i := b_i` for
//!    the clauses the chosen value marks;
//! 3. per clause `i`, thread `t_i` reads `x` from `a_i`.
//!
//! A run sees a coherence cycle on `x` exactly when every clause is marked.
//! Padding transitions stand in for silent moves and are writes by the
//! dedicated thread `tpad` on variable `pad` into register `rpad`.

mod corpus;
mod formula;
mod litmus;

use thiserror::Error;

use crate::machine::{MachineBuilder, RegisterMachine};

pub use corpus::{example1, exra, ghost_read_machine, m1};
pub use formula::{Form, Formula, FormulaError, Literal, TruthTable, MAX_BRUTE_FORCE_VARS};
pub use litmus::{litmus, litmus_specs, LitmusSpec, UnknownLitmus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("expected a {expected:?} formula")]
    WrongForm { expected: Form },
}

/// RA is violated iff the DNF formula is not a tautology. A clause is
/// marked when the assignment falsifies one of its literals.
pub fn tautology_to_machine(f: &Formula) -> Result<RegisterMachine, GadgetError> {
    if f.form != Form::Dnf {
        return Err(GadgetError::WrongForm { expected: Form::Dnf });
    }
    Ok(build(f, "taut"))
}

/// RA is violated iff the CNF formula is satisfiable. A clause is marked
/// when the assignment satisfies one of its literals.
pub fn sat_to_machine(f: &Formula) -> Result<RegisterMachine, GadgetError> {
    if f.form != Form::Cnf {
        return Err(GadgetError::WrongForm { expected: Form::Cnf });
    }
    Ok(build(f, "sat"))
}

fn build(f: &Formula, name: &str) -> RegisterMachine {
    let n = f.clauses.len();
    let mut b = MachineBuilder::new(name);
    for i in 0..n {
        b.thread(&format!("t{i}"));
    }
    b.thread("tpad");
    b.var("x");
    b.var("pad");
    for i in 0..n {
        b.reg(&format!("a{i}"));
    }
    for i in 0..n {
        b.reg(&format!("b{i}"));
    }
    b.reg("rpad");
    b.initial("i0");
    let eps = |b: &mut MachineBuilder, from: &str, to: &str| {
        b.write(from, to, "tpad", "pad", "rpad");
    };

    for i in 0..n {
        let prev = (i + n - 1) % n;
        b.write(&format!("i{}", 2 * i), &format!("i{}", 2 * i + 1), &format!("t{i}"), "x", &format!("b{prev}"));
        b.write(&format!("i{}", 2 * i + 1), &format!("i{}", 2 * i + 2), &format!("t{i}"), "x", &format!("a{i}"));
    }
    let mut at = format!("i{}", 2 * n);

    for (v, name) in f.vars.iter().enumerate() {
        let entry = format!("q_{name}");
        let exit = format!("q_{name}_end");
        eps(&mut b, &at, &entry);
        for value in [true, false] {
            let tag = if value { "t" } else { "f" };
            // Clauses marked by setting v to `value`.
            let marked: Vec<usize> = (0..n)
                .filter(|&i| {
                    f.clauses[i].iter().any(|l| {
                        l.var == v
                            && match f.form {
                                Form::Dnf => l.positive != value,
                                Form::Cnf => l.positive == value,
                            }
                    })
                })
                .collect();
            let mut cur = format!("q_{name}_{tag}0");
            eps(&mut b, &entry, &cur);
            if marked.is_empty() {
                eps(&mut b, &cur, &exit);
            }
            for (k, &i) in marked.iter().enumerate() {
                let next = if k + 1 == marked.len() { exit.clone() } else { format!("q_{name}_{tag}{}", k + 1) };
                b.copy(&cur, &next, &format!("a{i}"), &format!("b{i}"));
                cur = next;
            }
        }
        at = exit;
    }

    eps(&mut b, &at, "r0");
    for i in 0..n {
        b.read(&format!("r{i}"), &format!("r{}", i + 1), &format!("t{i}"), "x", &format!("a{i}"));
    }
    b.build()
}
