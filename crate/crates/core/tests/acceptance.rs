//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rmv::cli::{check_machine, CheckArgs, ModelChoice, Timestamp};
use rmv::egraph::{
    check_hb_acyclic, check_model, check_ra, check_sra, check_wra, graph_of_run, graph_of_trace, totalize_co,
    EventKind, ExecutionGraph, Model,
};
use rmv::explore::{default_depth, find_violation, weakest_violated};
use rmv::gadgets::{
    example1, ghost_read_machine, litmus, m1, sat_to_machine, tautology_to_machine, Form, Formula, Literal,
};
use rmv::machine::{parse_trace, RegisterMachine};
use rmv::saturation::{
    check_ghost_reads, check_mismatched_vars, explain, hidden_fact_bound, verify_wra, verify_wra_with,
    SaturationOptions, Stage,
};

const EXAMPLE1_LIMIT: Duration = Duration::from_secs(1);
const FIG1_LIMIT: Duration = Duration::from_secs(1);
const GHOST_LIMIT: Duration = Duration::from_secs(1);
const GADGET_LIMIT: Duration = Duration::from_secs(60);
const LITMUS_LIMIT: Duration = Duration::from_secs(5);
const GADGET_RANDOM: usize = 50;
const CROSS_ORACLE_MACHINES: u64 = 500;
const CROSS_ORACLE_DEPTH_CAP: usize = 12;
const RANDOM_RUNS: usize = 1000;
const ORACLE_GRAPHS: u64 = 3000;
const ORACLE_MAX_EVENTS: usize = 8;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))?;
    Ok(t)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = example1();
    let v = verify_wra(&m);
    let t = within(start, EXAMPLE1_LIMIT)?;
    let failed = v.failed_stage().ok_or("verify_wra passed")?;
    ensure(failed.stage == Stage::Hidden, || format!("failed at {:?}", failed.stage))?;
    let d = explain(failed, &m, None).map_err(|e| e.to_string())?;
    let got: Vec<(String, String)> = d.derivation.iter().map(|s| (s.rule.circled(), s.fact.clone())).collect();
    let want = [
        ("①", "Visible(q2)⟨a, phi, x⟩"),
        ("②", "Visible(q1)⟨a, c, x⟩"),
        ("③", "Visible(q1)⟨a, theta, x⟩"),
        ("④", "Hidden(q1)⟨a, theta, x⟩"),
        ("⑦", "FAIL"),
    ];
    let want: Vec<(String, String)> = want.iter().map(|(r, f)| (r.to_string(), f.to_string())).collect();
    ensure(got == want, || format!("derivation {got:?}"))?;
    let last = d.derivation.last().and_then(|s| s.transition.clone()).unwrap_or_default();
    ensure(last.ends_with("W(theta, x, a)"), || format!("rule 7 fired on `{last}`"))?;
    Ok(format!("hidden stage fails with ①②③④⑦ in {t:?}"))
}

/// Graph isomorphism up to event ids and thread names; variables and
/// initial writes are fixed.
fn isomorphic(a: &ExecutionGraph, b: &ExecutionGraph) -> bool {
    let (ea, eb) = (a.events(), b.events());
    if ea.len() != eb.len() || a.var_count() != b.var_count() {
        return false;
    }
    let inits = a.var_count();
    let rest: Vec<usize> = (inits..ea.len()).collect();
    let rel = |g: &ExecutionGraph, map: &dyn Fn(usize) -> usize| -> [BTreeSet<(usize, usize)>; 3] {
        [g.po(), g.rf(), g.co()].map(|r| r.iter().map(|&(x, y)| (map(x), map(y))).collect())
    };
    let target = rel(b, &|x| x);
    let mut perm = rest.clone();
    loop {
        let map = |x: usize| if x < inits { x } else { perm[x - inits] };
        let shape_ok = (inits..ea.len()).all(|i| {
            let (x, y) = (&ea[i], &eb[map(i)]);
            x.kind == y.kind && x.var == y.var
        });
        let mut threads = std::collections::HashMap::new();
        let threads_ok = (inits..ea.len()).all(|i| {
            let (x, y) = (ea[i].thread, eb[map(i)].thread);
            *threads.entry(x).or_insert(y) == y
        });
        let injective = threads.values().collect::<BTreeSet<_>>().len() == threads.len();
        if shape_ok && threads_ok && injective && rel(a, &map) == target {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let m = m1();
    ensure(verify_wra(&m).passed(), || "M1 fails WRA saturation".into())?;
    let v = find_violation(&m, Model::Ra, 6);
    let t = within(start, FIG1_LIMIT)?;
    let viol = v.violation().ok_or("no RA violation within depth 6")?;
    let m1_trace = parse_trace(b"W theta x a 1\nW theta x a 2\nW phi x b 3\nR phi x a 2\nR theta x b 3\n").unwrap();
    let (m1_run_graph, _, _) = graph_of_trace(&m1_trace).unwrap();
    ensure(viol.run.len() == 5, || {
        format!(
            "run has length {} (transitions {:?}), expected 5; M1 has a strictly shorter RA violation",
            viol.run.len(),
            viol.run.transitions()
        )
    })?;
    ensure(isomorphic(&viol.graph, &m1_run_graph), || "graph is not isomorphic to the reference".into())?;
    Ok(format!("run of length 5 with the two-edge co cycle in {t:?}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let m = ghost_read_machine();
    let ghost = check_ghost_reads(&m);
    let mismatch = check_mismatched_vars(&m);
    let t = within(start, GHOST_LIMIT)?;
    let d = explain(&ghost, &m, None).map_err(|e| format!("ghost stage: {e}"))?;
    let chain: Vec<String> = d.derivation.iter().map(|s| s.rule.circled()).collect();
    ensure(chain == ["①", "⑤", "⑥", "②"], || format!("ghost chain {chain:?}"))?;
    let states: Vec<&str> = d.derivation.iter().map(|s| s.state.as_str()).collect();
    ensure(states == ["q2", "q1", "q0", "q0"], || format!("ghost states {states:?}"))?;
    let d = explain(&mismatch, &m, None).map_err(|e| format!("mismatch stage: {e}"))?;
    let last = d.derivation.last().unwrap();
    let edge = last.transition.clone().unwrap_or_default();
    ensure(last.fact == "FAIL" && edge == "q2 -> q0 : W(t2, y, a2)", || format!("mismatch fails on `{edge}`"))?;
    Ok(format!("ghost chain ①⑤⑥②, mismatch on W(t2, y, a2) in {t:?}"))
}

/// Every formula over `vars` variables with `1..=max_clauses` clauses, each
/// clause a non-empty set of at most three literals.
fn all_formulas(form: Form, vars: usize, max_clauses: usize) -> Vec<Formula> {
    let lits: Vec<Literal> =
        (0..vars).flat_map(|v| [true, false].map(|positive| Literal { var: v, positive })).collect();
    let clauses: Vec<Vec<Literal>> = (1u32..1 << lits.len())
        .filter(|mask| mask.count_ones() <= 3)
        .map(|mask| (0..lits.len()).filter(|i| mask >> i & 1 == 1).map(|i| lits[i]).collect())
        .collect();
    let mut out = Vec::new();
    let mut shapes: Vec<Vec<usize>> = (0..clauses.len()).map(|i| vec![i]).collect();
    for _ in 1..max_clauses {
        let longer: Vec<Vec<usize>> = shapes
            .iter()
            .filter(|s| s.len() == shapes.last().unwrap().len())
            .flat_map(|s| (0..clauses.len()).map(move |i| [s.clone(), vec![i]].concat()))
            .collect();
        shapes.extend(longer);
    }
    for s in shapes {
        let cs = s.iter().map(|&i| clauses[i].clone()).collect();
        out.push(Formula::new(form, vars, cs).unwrap());
    }
    out
}

fn random_formula(rng: &mut StdRng, form: Form, vars: usize, clauses: usize) -> Formula {
    let cs = (0..clauses)
        .map(|_| {
            let len = rng.gen_range(1..=3);
            (0..len).map(|_| Literal { var: rng.gen_range(0..vars), positive: rng.gen_bool(0.5) }).collect()
        })
        .collect();
    Formula::new(form, vars, cs).unwrap()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(4);
    let mut cases = Vec::new();
    for form in [Form::Dnf, Form::Cnf] {
        for vars in 1..=2 {
            cases.extend(all_formulas(form, vars, 2));
        }
        for _ in 0..GADGET_RANDOM {
            cases.push(random_formula(&mut rng, form, 3, 3));
        }
    }
    let disagreements: Vec<String> = cases
        .par_iter()
        .filter_map(|f| {
            let table = f.brute_force().unwrap();
            let (m, expected) = match f.form {
                Form::Dnf => (tautology_to_machine(f).unwrap(), !table.tautology),
                Form::Cnf => (sat_to_machine(f).unwrap(), table.satisfiable),
            };
            let v = find_violation(&m, Model::Ra, default_depth(&m));
            (!v.conclusive() || v.is_violation() != expected).then(|| format!("{:?} {f}", f.form))
        })
        .collect();
    let t = within(start, GADGET_LIMIT)?;
    ensure(disagreements.is_empty(), || format!("{} disagreements, first: {}", disagreements.len(), disagreements[0]))?;
    Ok(format!("{} formulas agree with their truth tables in {t:?}", cases.len()))
}

fn criterion_5() -> Outcome {
    let table = [
        ("mp", Some(Model::Wra)),
        ("mp-trans", Some(Model::Wra)),
        ("sb", None),
        ("sf", Some(Model::Ra)),
        ("ww", Some(Model::Ra)),
        ("ww-mp", None),
        ("2+2w", Some(Model::Sra)),
        ("oscillating", Some(Model::Sra)),
        ("out-of-order-reads", Some(Model::Ra)),
    ];
    let mut slowest = Duration::ZERO;
    for (name, want) in table {
        let m = (litmus(name).map_err(|e| e.to_string())?.build)();
        let start = Instant::now();
        let w = weakest_violated(&m, default_depth(&m));
        let t = within(start, LITMUS_LIMIT).map_err(|e| format!("{name}: {e}"))?;
        slowest = slowest.max(t);
        ensure(w.weakest == want && w.conclusive(), || format!("{name}: got {:?}, want {want:?}", w.weakest))?;
    }
    Ok(format!("9 litmus machines match, slowest {slowest:?}"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let results: Vec<(bool, Option<String>)> = (0..CROSS_ORACLE_MACHINES)
        .into_par_iter()
        .map(|seed| {
            let mut rng = StdRng::seed_from_u64(6_000 + seed);
            let m = common::random_machine(&mut rng, 4, 7);
            let sat = verify_wra(&m).passed();
            let depth = default_depth(&m).min(CROSS_ORACLE_DEPTH_CAP);
            let found = find_violation(&m, Model::Wra, depth).is_violation();
            let issue = (sat == found)
                .then(|| format!("seed {seed}: saturation {}, explore {}\n{}", pass(sat), pass(!found), m.print()));
            (sat, issue)
        })
        .collect();
    let fails = results.iter().filter(|r| !r.0).count();
    let issues: Vec<&String> = results.iter().filter_map(|r| r.1.as_ref()).collect();
    ensure(issues.is_empty(), || format!("{} disagreements; first {}", issues.len(), issues[0]))?;
    Ok(format!("{CROSS_ORACLE_MACHINES} machines agree ({fails} fail WRA) in {:?}", start.elapsed()))
}

fn pass(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn random_graphs_from_runs(seed: u64, count: usize) -> Vec<ExecutionGraph> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let m = common::random_machine(&mut rng, 4, 8);
        let run = common::random_run(&mut rng, &m, 10);
        if let Ok(g) = graph_of_run(&run, &m) {
            out.push(g);
        }
    }
    out
}

/// Brute-force consistency via simple path enumeration.
struct Oracle<'g> {
    g: &'g ExecutionGraph,
}

impl Oracle<'_> {
    fn path(&self, edges: &BTreeSet<(usize, usize)>, from: usize, to: usize) -> bool {
        fn go(edges: &BTreeSet<(usize, usize)>, at: usize, to: usize, visited: &mut Vec<usize>) -> bool {
            for &(a, b) in edges {
                if a != at {
                    continue;
                }
                if b == to {
                    return true;
                }
                if !visited.contains(&b) {
                    visited.push(b);
                    if go(edges, b, to, visited) {
                        return true;
                    }
                    visited.pop();
                }
            }
            false
        }
        go(edges, from, to, &mut vec![from])
    }

    fn cyclic(&self, edges: &BTreeSet<(usize, usize)>) -> bool {
        (0..self.g.events().len()).any(|e| self.path(edges, e, e))
    }

    fn hb(&self) -> BTreeSet<(usize, usize)> {
        self.g.po().union(self.g.rf()).copied().collect()
    }

    fn co(&self, var: Option<usize>) -> BTreeSet<(usize, usize)> {
        let ev = self.g.events();
        let on = |x: usize| var.is_none_or(|v| v == x);
        let mut co: BTreeSet<_> = self.g.co().iter().filter(|&&(a, _)| on(ev[a].var)).copied().collect();
        for i in ev.iter().filter(|e| e.kind == EventKind::Init && on(e.var)) {
            for w in ev.iter().filter(|e| e.kind == EventKind::Write && e.var == i.var) {
                co.insert((i.id, w.id));
            }
        }
        co
    }

    fn wra(&self) -> bool {
        let hb = self.hb();
        let ev = self.g.events();
        !self.g.rf().iter().any(|&(src, r)| {
            ev.iter()
                .any(|w| w.is_write() && w.var == ev[src].var && self.path(&hb, src, w.id) && self.path(&hb, w.id, r))
        })
    }

    fn ra(&self) -> bool {
        (0..self.g.var_count()).all(|x| !self.cyclic(&self.hb().union(&self.co(Some(x))).copied().collect()))
    }

    fn sra(&self) -> bool {
        !self.cyclic(&self.hb().union(&self.co(None)).copied().collect())
    }
}

fn criterion_7() -> Outcome {
    // (a) fact bound and termination; (b) order independence.
    let opts_full = SaturationOptions { full_fixpoint: true, ..Default::default() };
    let mut machines: Vec<RegisterMachine> = vec![example1(), m1(), ghost_read_machine()];
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..300 {
        machines.push(common::random_machine(&mut rng, 6, 12));
    }
    for (i, m) in machines.iter().enumerate() {
        let bound = hidden_fact_bound(m);
        let base = verify_wra_with(m, &opts_full);
        for s in &base.stages {
            ensure(s.facts.len() <= bound, || format!("(a) machine {i}: {} facts > bound {bound}", s.facts.len()))?;
        }
        for k in 0..3 {
            let mut order: Vec<usize> = (0..m.transitions.len()).collect();
            order.shuffle(&mut rng);
            let opts = SaturationOptions { transition_order: Some(order), lifo: k % 2 == 1, full_fixpoint: true };
            let shuffled = verify_wra_with(m, &opts);
            ensure(shuffled.passed() == base.passed(), || format!("(b) machine {i}: verdict changed"))?;
            let facts = |v: &rmv::saturation::WraVerdict| v.stages.iter().map(|s| s.facts.clone()).collect::<Vec<_>>();
            ensure(facts(&shuffled) == facts(&base), || format!("(b) machine {i}: fact set changed"))?;
            let quick = verify_wra_with(m, &SaturationOptions { full_fixpoint: false, ..opts });
            ensure(quick.passed() == base.passed(), || format!("(b) machine {i}: early-stop verdict changed"))?;
        }
    }

    // (c) model ordering and (d) totalization on graphs of random runs.
    let graphs = random_graphs_from_runs(77, RANDOM_RUNS);
    let mut ra_passing = 0;
    for (i, g) in graphs.iter().enumerate() {
        let (w, r, s) = (check_wra(g).is_ok(), check_ra(g).is_ok(), check_sra(g).is_ok());
        ensure((!s || r) && (!r || w), || format!("(c) run {i}: wra {w} ra {r} sra {s}"))?;
        if !r {
            continue;
        }
        ra_passing += 1;
        let t = totalize_co(g, Model::Ra).map_err(|e| format!("(d) run {i}: {e:?}"))?;
        ensure(g.co().is_subset(t.co()), || format!("(d) run {i}: input co dropped"))?;
        ensure(check_ra(&t).is_ok(), || format!("(d) run {i}: totalized graph fails RA"))?;
        let ev = t.events();
        for a in ev.iter().filter(|e| e.kind == EventKind::Write) {
            for b in ev.iter().filter(|e| e.kind == EventKind::Write && e.var == a.var && e.id > a.id) {
                let ordered = t.co().contains(&(a.id, b.id)) || t.co().contains(&(b.id, a.id));
                ensure(ordered, || format!("(d) run {i}: writes {} and {} unordered", a.id, b.id))?;
            }
        }
    }

    // (e) brute-force oracle.
    for seed in 0..ORACLE_GRAPHS {
        let mut rng = StdRng::seed_from_u64(70_000 + seed);
        let vars = rng.gen_range(1..=2);
        let events = rng.gen_range(0..=ORACLE_MAX_EVENTS - vars);
        let threads = rng.gen_range(1..=3);
        let g = common::random_graph(&mut rng, events, threads, vars);
        let o = Oracle { g: &g };
        let got = [check_hb_acyclic(&g).is_ok(), check_wra(&g).is_ok(), check_ra(&g).is_ok(), check_sra(&g).is_ok()];
        let want = [!o.cyclic(&o.hb()), o.wra(), o.ra(), o.sra()];
        ensure(got == want, || format!("(e) graph {seed}: checks {got:?}, oracle {want:?}"))?;
        for model in Model::ALL {
            if let Err(w) = check_model(&g, model) {
                ensure(w.is_valid_in(&g), || format!("(e) graph {seed}: invalid {model} witness"))?;
            }
        }
    }
    Ok(format!(
        "{} machines, {RANDOM_RUNS} runs ({ra_passing} RA-consistent), {ORACLE_GRAPHS} oracle graphs",
        machines.len()
    ))
}

fn criterion_8() -> Outcome {
    for m in [m1(), example1(), (litmus("2+2w").unwrap().build)()] {
        let text = m.print();
        let args = CheckArgs { model: ModelChoice::All, ..Default::default() };
        let run = || {
            let mut r = check_machine(&m, text.as_bytes(), &args).report;
            r.timestamp = Timestamp { unix_ms: 0, elapsed_ms: 0 };
            r.to_json_string()
        };
        let (a, b) = (run(), run());
        ensure(a == b, || format!("{}: reports differ", m.name))?;
    }
    Ok("identical reports for 3 machines".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("example1 derivation", criterion_1),
        ("M1 and its RA counterexample", criterion_2),
        ("ghost and mismatch derivations", criterion_3),
        ("gadget equivalence", criterion_4),
        ("litmus table", criterion_5),
        ("saturation vs exploration", criterion_6),
        ("invariants", criterion_7),
        ("determinism", criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match result {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
