//! Decide WRA by saturation and explain the failing derivation.
//!
//! `cargo run --example verify_wra`

use rmv::egraph::Model;
use rmv::explore::find_violation;
use rmv::gadgets::{example1, m1};
use rmv::saturation::explain;

fn main() {
    for m in [example1(), m1()] {
        let v = rmv::saturation::verify_wra(&m);
        println!("== {}", m.name);
        for s in &v.stages {
            println!("{} stage: {} ({} facts)", s.stage, if s.passed() { "pass" } else { "FAIL" }, s.facts_count());
        }
        if let Some(failed) = v.failed_stage() {
            let witness = find_violation(&m, Model::Wra, 8);
            let run = witness.violation().map(|w| &w.run);
            print!("{}", explain(failed, &m, run).unwrap().render());
        }
        println!();
    }
}
