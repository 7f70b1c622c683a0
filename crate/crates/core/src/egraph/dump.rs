use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::{json, Value as Json};

use super::{CycleWitness, EdgeKind, EventKind, ExecutionGraph, Relation};
use crate::machine::RegisterMachine;

/// Display names for threads and variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Names {
    pub threads: Vec<String>,
    pub vars: Vec<String>,
}

impl Names {
    pub fn of_machine(m: &RegisterMachine) -> Self {
        Names { threads: m.threads.clone(), vars: m.vars.clone() }
    }

    /// `t0, t1, ...` and `x0, x1, ...`, enough for every event of `g`.
    pub fn generic(g: &ExecutionGraph) -> Self {
        let threads = g.events().iter().filter_map(|e| e.thread).max().map_or(0, |t| t + 1);
        Names {
            threads: (0..threads).map(|i| format!("t{i}")).collect(),
            vars: (0..g.var_count()).map(|i| format!("x{i}")).collect(),
        }
    }

    fn thread(&self, t: usize) -> String {
        self.threads.get(t).cloned().unwrap_or_else(|| format!("t{t}"))
    }

    fn var(&self, v: usize) -> String {
        self.vars.get(v).cloned().unwrap_or_else(|| format!("x{v}"))
    }
}

fn pairs(set: &BTreeSet<(usize, usize)>) -> Json {
    Json::Array(set.iter().map(|&(a, b)| json!([a, b])).collect())
}

impl ExecutionGraph {
    pub fn to_json(&self, names: &Names) -> Json {
        let events: Vec<Json> = self
            .events()
            .iter()
            .map(|e| {
                json!({
                    "id": e.id,
                    "kind": e.kind,
                    "thread": e.thread.map(|t| names.thread(t)),
                    "var": names.var(e.var),
                    "value": e.value.literal(),
                })
            })
            .collect();
        json!({
            "events": events,
            "po": pairs(self.po()),
            "rf": pairs(self.rf()),
            "co": pairs(self.co()),
        })
    }

    /// Graphviz rendering. Only the immediate `po` edges are drawn; edges on
    /// the witness cycle are red.
    pub fn to_dot(&self, names: &Names, witness: Option<&CycleWitness>) -> String {
        let hot: BTreeSet<(usize, usize, EdgeKind)> = witness
            .map(|w| {
                w.cycle
                    .windows(2)
                    .filter_map(|s| s[0].edge.map(|k| (s[0].event, s[1].event, k)))
                    .map(|(a, b, k)| if k == EdgeKind::RfInverse { (b, a, EdgeKind::Rf) } else { (a, b, k) })
                    .collect()
            })
            .unwrap_or_default();
        let mut out = String::from("digraph egraph {\n  node [shape=box, fontname=\"monospace\"];\n");
        for e in self.events() {
            let label = match e.kind {
                EventKind::Init => format!("init {} = 0", names.var(e.var)),
                EventKind::Write => {
                    format!("W({}, {}, {})", names.thread(e.thread.unwrap()), names.var(e.var), e.value.literal())
                }
                EventKind::Read => {
                    format!("R({}, {}, {})", names.thread(e.thread.unwrap()), names.var(e.var), e.value.literal())
                }
            };
            let _ = writeln!(out, "  e{} [label=\"e{}: {}\"];", e.id, e.id, label);
        }
        let immediate =
            self.po().iter().filter(|&&(a, b)| !self.po().iter().any(|&(c, d)| c == a && self.po().contains(&(d, b))));
        let mut edge = |a: usize, b: usize, k: EdgeKind, style: &str| {
            let color = if hot.contains(&(a, b, k)) { ", color=red, penwidth=2" } else { "" };
            let _ = writeln!(out, "  e{a} -> e{b} [label=\"{}\"{style}{color}];", k.label());
        };
        for &(a, b) in immediate {
            edge(a, b, EdgeKind::Po, "");
        }
        for &(a, b) in self.rf() {
            edge(a, b, EdgeKind::Rf, ", style=dashed");
        }
        for &(a, b) in self.co() {
            edge(a, b, EdgeKind::Co, ", style=dotted");
        }
        for &(a, b, k) in &hot {
            if k == EdgeKind::Co && !self.co().contains(&(a, b)) {
                edge(a, b, k, ", style=dotted");
            }
        }
        out.push_str("}\n");
        out
    }
}

impl CycleWitness {
    pub fn to_json(&self, names: &Names) -> Json {
        let relation = match self.relation {
            Relation::Hb => json!({ "kind": "hb" }),
            Relation::Wra { source, intervening, read } => {
                json!({ "kind": "wra", "source": source, "intervening": intervening, "read": read })
            }
            Relation::Ra { var } => json!({ "kind": "ra", "var": names.var(var) }),
            Relation::Sra => json!({ "kind": "sra" }),
        };
        json!({ "relation": relation, "cycle": self.cycle })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egraph::check_ra;
    use crate::machine::Value::Token;

    fn m1_run_graph() -> ExecutionGraph {
        let mut g = ExecutionGraph::init_graph(1);
        g.add_write(0, 0, Token(1)).unwrap();
        g.add_write(0, 0, Token(2)).unwrap();
        g.add_write(1, 0, Token(3)).unwrap();
        g.add_read(1, 0, Token(2)).unwrap();
        g.add_read(0, 0, Token(3)).unwrap();
        g
    }

    #[test]
    fn json_shape() {
        let g = m1_run_graph();
        let j = g.to_json(&Names::generic(&g));
        assert_eq!(j["events"].as_array().unwrap().len(), 6);
        assert_eq!(j["events"][0]["kind"], "init");
        assert_eq!(j["events"][0]["thread"], Json::Null);
        assert_eq!(j["events"][4]["value"], 2);
        assert_eq!(j["co"], json!([[1, 2], [1, 3], [2, 3], [3, 2]]));
    }

    #[test]
    fn witness_json_and_dot() {
        let g = m1_run_graph();
        let w = check_ra(&g).unwrap_err();
        let names = Names::generic(&g);
        let j = w.to_json(&names);
        assert_eq!(j["relation"]["kind"], "ra");
        assert_eq!(j["cycle"][0]["edge"], "co");
        assert_eq!(j["cycle"][2]["edge"], Json::Null);
        let dot = g.to_dot(&names, Some(&w));
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("color=red").count(), 2);
        // transitive po edge e1 -> e2 -> e5 is not drawn directly
        assert!(!dot.contains("e1 -> e5"));
    }
}
