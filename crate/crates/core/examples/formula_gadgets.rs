//! Compile formulas to machines whose RA verdict answers tautology (DNF) or
//! satisfiability (CNF), and compare with the truth table.
//!
//! `cargo run --example formula_gadgets -- "a & !b | !a & b"`

use rmv::egraph::Model;
use rmv::explore::{default_depth, find_violation};
use rmv::gadgets::{sat_to_machine, tautology_to_machine, Form, Formula};

fn main() {
    let extra = std::env::args().nth(1);
    let mut cases =
        vec![("z & !y | !z & y", Form::Dnf), ("v | !v", Form::Dnf), ("(a | b) & !a", Form::Cnf), ("v & !v", Form::Cnf)];
    if let Some(f) = extra.as_deref() {
        cases.insert(0, (f, Form::Dnf));
    }
    for (text, form) in cases {
        let f = match Formula::parse(text, form) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("{text}: {e}");
                continue;
            }
        };
        let (m, question) = match form {
            Form::Dnf => (tautology_to_machine(&f).unwrap(), "tautology"),
            Form::Cnf => (sat_to_machine(&f).unwrap(), "satisfiable"),
        };
        let table = f.brute_force().unwrap();
        let violated = find_violation(&m, Model::Ra, default_depth(&m)).is_violation();
        let answer = match form {
            Form::Dnf => !violated,
            Form::Cnf => violated,
        };
        let expected = if form == Form::Dnf { table.tautology } else { table.satisfiable };
        println!(
            "{f:<24} {question}: {answer:<5} (truth table {expected}), machine of {} transitions",
            m.transitions.len()
        );
    }
}
