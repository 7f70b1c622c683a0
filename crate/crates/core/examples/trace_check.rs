//! Check a single trace without a machine, then extend its coherence order
//! to a total one.
//!
//! `cargo run --example trace_check [TRACE_FILE]`

use rmv::egraph::{check_model, graph_of_trace, totalize_co, Model, Names};
use rmv::machine::parse_trace;

const DEFAULT: &str = "\
W t1 x a 1
W t2 x b 2
W t2 y c 3
R t1 y c 3
";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => DEFAULT.to_string(),
    };
    let trace = parse_trace(text.as_bytes()).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2)
    });
    let (g, threads, vars) = graph_of_trace(&trace).unwrap();
    let names = Names { threads, vars };
    for model in Model::ALL {
        match check_model(&g, model) {
            Ok(()) => println!("{model}: consistent"),
            Err(w) => println!("{model}: violated, cycle of {} edges", w.len()),
        }
    }
    match totalize_co(&g, Model::Ra) {
        Ok(t) => println!("total co: {:?}", t.co()),
        Err(e) => println!("no total co: {e:?}"),
    }
    println!("{}", g.to_json(&names));
}
