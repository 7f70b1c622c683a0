//! Parse a machine from text, print it back and list its reactivity gaps.
//!
//! `cargo run --example parse_machine [FILE]`

use rmv::machine::parse_machine;

const DEFAULT: &str = "\
machine handoff
threads producer consumer
vars data flag
regs d f
init q0
q0 -> q1 : W(producer, data, d)
q1 -> q2 : W(producer, flag, f)
q2 -> q3 : R(consumer, flag, f)
q3 -> q4 : R(consumer, data, d)
";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => DEFAULT.to_string(),
    };
    let m = match parse_machine(text.as_bytes()) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("parse error: {e}");
            std::process::exit(2);
        }
    };
    print!("{}", m.print());
    println!(
        "\n{} states, {} transitions, {}",
        m.states.len(),
        m.transitions.len(),
        match m.longest_path() {
            Some(n) => format!("acyclic with longest run {n}"),
            None => "cyclic".into(),
        }
    );
    let gaps = m.reactivity_gaps();
    println!("{} reactivity gaps", gaps.len());
    for g in gaps.iter().take(5) {
        let what = if g.write { "write" } else { "read" };
        println!("  {}: no {what} by {} on {}", m.states[g.state], m.threads[g.thread], m.vars[g.var]);
    }
}
