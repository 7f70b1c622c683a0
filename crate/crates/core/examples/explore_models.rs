//! Find the weakest violated model by saturation plus bounded exploration,
//! and print the counterexample graph in DOT.
//!
//! `cargo run --example explore_models`

use rmv::egraph::Names;
use rmv::explore::{default_depth, weakest_violated, ExploreVerdict, Outcome};
use rmv::gadgets::{exra, m1};

fn main() {
    for m in [m1(), exra()] {
        let depth = default_depth(&m);
        let w = weakest_violated(&m, depth);
        println!("== {} (depth {depth})", m.name);
        println!("WRA by saturation: {}", if w.saturation.passed() { "pass" } else { "fail" });
        for v in &w.explored {
            println!("{}: {} after {} nodes", v.model, outcome_kind(v), v.stats.nodes);
        }
        let Some(model) = w.weakest else { continue };
        let viol = w.explored(model).and_then(|v| v.violation()).unwrap();
        println!("weakest violated: {model}");
        for line in viol.run.trace_lines(&m) {
            println!("  {line}");
        }
        print!("{}", viol.graph.to_dot(&Names::of_machine(&m), viol.witness.as_ref()));
    }
}

fn outcome_kind(v: &ExploreVerdict) -> &'static str {
    match v.outcome {
        Outcome::Violation(_) => "violation",
        Outcome::CleanExhaustive => "clean (exhaustive)",
        Outcome::CleanBounded(_) => "clean (bounded)",
    }
}
