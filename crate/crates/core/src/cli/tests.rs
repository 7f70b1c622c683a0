use std::fs;

use super::*;
use crate::gadgets::{example1, m1};

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_check(args: &CheckArgs) -> (Exit, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cmd_check(args, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn model_choice_parses() {
    assert_eq!("RA".parse::<ModelChoice>(), Ok(ModelChoice::Ra));
    assert_eq!(ModelChoice::All.strongest(), Model::Sra);
    assert!("sc".parse::<ModelChoice>().is_err());
}

#[test]
fn check_example1_wra() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "ex1.rm", &example1().print());
    let (code, out, _) = run_check(&CheckArgs { machine: path, model: ModelChoice::Wra, ..Default::default() });
    assert_eq!(code, Exit::Violation);
    assert!(out.contains("hidden stage: FAIL"));
    assert!(out.contains("⑦ FAIL"));
    assert!(out.contains("weakest violated: WRA"));
}

#[test]
fn check_m1_all_reports_ra() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "m1.rm", &m1().print());
    let args = CheckArgs { machine: path, json: true, ..Default::default() };
    let (code, out, _) = run_check(&args);
    assert_eq!(code, Exit::Violation);
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(j["weakest_violated"], "ra");
    assert_eq!(j["models"][0]["status"], "pass");
    assert_eq!(j["depth"]["value"], 12);
    assert_eq!(j["schema_version"], SCHEMA_VERSION);
    assert!(j["input"]["digest"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn check_is_deterministic_modulo_timestamp() {
    let m = m1();
    let text = m.print();
    let args = CheckArgs::default();
    let strip = |mut r: Report| {
        r.timestamp = Timestamp { unix_ms: 0, elapsed_ms: 0 };
        r.to_json_string()
    };
    let a = strip(check_machine(&m, text.as_bytes(), &args).report);
    let b = strip(check_machine(&m, text.as_bytes(), &args).report);
    assert_eq!(a, b);
}

#[test]
fn empty_machine_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "e.rm", "machine empty\nthreads t\nvars x\nregs a\nstates q0\ninit q0\n");
    let (code, _, err) = run_check(&CheckArgs { machine: path, ..Default::default() });
    assert_eq!(code, Exit::Consistent, "{err}");
}

#[test]
fn parse_and_io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.rm", "machine bad\nthreads t\nvars x\nregs a\ninit q0\nq0 -> q1 : X(t, x, a)\n");
    assert_eq!(run_check(&CheckArgs { machine: bad, ..Default::default() }).0, Exit::Usage);
    let missing = dir.path().join("missing.rm");
    assert_eq!(run_check(&CheckArgs { machine: missing, ..Default::default() }).0, Exit::Usage);
}

#[test]
fn bounded_check_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = "machine loop\nthreads t\nvars x\nregs a\ninit q0\nq0 -> q1 : W(t, x, a)\nq1 -> q1 : W(t, x, a)\nq1 -> q1 : R(t, x, a)\n";
    let path = write(&dir, "loop.rm", text);
    let (code, out, _) = run_check(&CheckArgs { machine: path, depth: Some(4), ..Default::default() });
    assert_eq!(code, Exit::Inconclusive);
    assert!(out.contains("inconclusive"));
}

#[test]
fn counterexample_replays_with_run() {
    let dir = tempfile::tempdir().unwrap();
    let mpath = write(&dir, "m1.rm", &m1().print());
    let (_, out, _) = run_check(&CheckArgs { machine: mpath.clone(), json: true, ..Default::default() });
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    let lines: Vec<String> =
        j["counterexample"]["trace"].as_array().unwrap().iter().map(|l| l.as_str().unwrap().to_string()).collect();
    let tpath = write(&dir, "cex.trace", &(lines.join("\n") + "\n"));
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let args = RunArgs { machine: Some(mpath), trace: tpath, json: true, ..Default::default() };
    assert_eq!(cmd_run(&args, &mut o, &mut e), Exit::Violation);
    let r: serde_json::Value = serde_json::from_slice(&o).unwrap();
    assert_eq!(r["weakest_violated"], "ra");
}

#[test]
fn run_standalone_traces() {
    let dir = tempfile::tempdir().unwrap();
    let fig = "W t1 x a 1\nW t2 x b 2\nR t1 x b 2\nR t2 x a 1\n";
    let cases = [(fig, Exit::Violation), ("", Exit::Consistent), ("W t x a 1\nW t x b 1\n", Exit::Usage)];
    for (i, (text, want)) in cases.into_iter().enumerate() {
        let tpath = write(&dir, &format!("t{i}.trace"), text);
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let args = RunArgs { trace: tpath, model: ModelChoice::Ra, ..Default::default() };
        assert_eq!(cmd_run(&args, &mut o, &mut e), want, "{text}");
    }
}

#[test]
fn dot_output_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "m1.rm", &m1().print());
    let dot = dir.path().join("cex.dot");
    let args = CheckArgs { machine: path, quiet: true, dot: Some(dot.clone()), ..Default::default() };
    let (code, out, _) = run_check(&args);
    assert_eq!(code, Exit::Violation);
    assert!(out.is_empty());
    assert!(fs::read_to_string(dot).unwrap().starts_with("digraph"));
}

#[test]
fn gadget_then_check() {
    let dir = tempfile::tempdir().unwrap();
    for (taut, sat, want) in [
        (Some("v | !v"), None, Exit::Consistent),
        (Some("z & !y | !z & y"), None, Exit::Violation),
        (None, Some("v & !v"), Exit::Consistent),
    ] {
        let out_path = dir.path().join("g.rm");
        let g = GadgetArgs { taut: taut.map(Into::into), sat: sat.map(Into::into), output: Some(out_path.clone()) };
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(cmd_gadget(&g, &mut o, &mut e), Exit::Consistent);
        let args = CheckArgs { machine: out_path, model: ModelChoice::Ra, quiet: true, ..Default::default() };
        assert_eq!(run_check(&args).0, want, "{taut:?} {sat:?}");
    }
    let (mut o, mut e) = (Vec::new(), Vec::new());
    assert_eq!(cmd_gadget(&GadgetArgs { taut: Some("a &".into()), ..Default::default() }, &mut o, &mut e), Exit::Usage);
}

#[test]
fn litmus_commands() {
    let run = |name: &str, check: bool| {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let args = LitmusArgs { name: Some(name.into()), check, ..Default::default() };
        (cmd_litmus(&args, &mut o, &mut e), String::from_utf8(o).unwrap())
    };
    let (code, out) = run("mp", true);
    assert_eq!(code, Exit::Violation);
    assert!(out.starts_with("weakest violated: WRA"));
    assert_eq!(run("sb", true).0, Exit::Consistent);
    assert_eq!(run("bogus", true).0, Exit::Usage);
    let (code, text) = run("sf", false);
    assert_eq!(code, Exit::Consistent);
    assert!(parse_machine(text.as_bytes()).is_ok());
}
