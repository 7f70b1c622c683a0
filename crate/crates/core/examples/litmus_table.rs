//! Weakest violated model for each litmus machine.
//!
//! `cargo run --example litmus_table`

use std::time::Instant;

use rmv::explore::{default_depth, weakest_violated};
use rmv::gadgets::litmus_specs;

fn main() {
    println!("{:<20} {:<8} {:<8} time", "test", "weakest", "expected");
    for s in litmus_specs() {
        let m = (s.build)();
        let start = Instant::now();
        let w = weakest_violated(&m, default_depth(&m));
        let show = |k: Option<rmv::egraph::Model>| k.map_or("none".to_string(), |k| k.to_string());
        println!("{:<20} {:<8} {:<8} {:?}", s.name, show(w.weakest), show(s.expected), start.elapsed());
    }
}
