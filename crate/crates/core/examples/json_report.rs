//! Produce the same JSON report as `rmv check --json`, in process.
//!
//! `cargo run --example json_report`

use rmv::cli::{check_machine, CheckArgs, ModelChoice};
use rmv::gadgets::m1;

fn main() {
    let m = m1();
    let text = m.print();
    let args = CheckArgs { model: ModelChoice::All, ..Default::default() };
    let outcome = check_machine(&m, text.as_bytes(), &args);
    println!("{}", outcome.report.to_json_string());
}
