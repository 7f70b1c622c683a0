use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::{EventKind, ExecutionGraph, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    Po,
    Rf,
    Co,
    RfInverse,
}

impl EdgeKind {
    pub fn label(self) -> &'static str {
        match self {
            EdgeKind::Po => "po",
            EdgeKind::Rf => "rf",
            EdgeKind::Co => "co",
            EdgeKind::RfInverse => "rf-inverse",
        }
    }
}

/// Which relation a witness cycle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `po ∪ rf`
    Hb,
    /// `read` reads from `source` although `intervening` lies between them
    /// in happens-before.
    Wra { source: usize, intervening: usize, read: usize },
    /// `po ∪ rf ∪ co_var`
    Ra { var: usize },
    /// `po ∪ rf ∪ co`
    Sra,
}

impl Relation {
    pub fn model(&self) -> Option<Model> {
        match self {
            Relation::Hb => None,
            Relation::Wra { .. } => Some(Model::Wra),
            Relation::Ra { .. } => Some(Model::Ra),
            Relation::Sra => Some(Model::Sra),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CycleStep {
    pub event: usize,
    /// Edge to the next step; `None` on the closing step.
    pub edge: Option<EdgeKind>,
}

/// A closed walk `e0 -k0-> e1 -k1-> ... -> e0`; the last step repeats the
/// first event and carries no edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleWitness {
    pub relation: Relation,
    pub cycle: Vec<CycleStep>,
}

impl CycleWitness {
    /// Number of edges on the cycle.
    pub fn len(&self) -> usize {
        self.cycle.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn events(&self) -> impl Iterator<Item = usize> + '_ {
        self.cycle[..self.len()].iter().map(|s| s.event)
    }

    /// Whether every step is an edge of the stated kind in `g`.
    pub fn is_valid_in(&self, g: &ExecutionGraph) -> bool {
        if self.cycle.len() < 2 || self.cycle.first().map(|s| s.event) != self.cycle.last().map(|s| s.event) {
            return false;
        }
        self.cycle.windows(2).all(|w| {
            let (a, b) = (w[0].event, w[1].event);
            match w[0].edge {
                Some(EdgeKind::Po) => g.po.contains(&(a, b)),
                Some(EdgeKind::Rf) => g.rf.contains(&(a, b)),
                Some(EdgeKind::RfInverse) => g.rf.contains(&(b, a)),
                Some(EdgeKind::Co) => g.co.contains(&(a, b)) || implicit_co(g, a, b),
                None => false,
            }
        })
    }
}

fn implicit_co(g: &ExecutionGraph, a: usize, b: usize) -> bool {
    g.events[a].kind == EventKind::Init && g.events[b].kind == EventKind::Write && g.events[a].var == g.events[b].var
}

/// Forward reachability (transitive, not reflexive) for each node.
pub(crate) fn reachability(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<FixedBitSet> {
    let mut succ = vec![Vec::new(); n];
    for (a, b) in edges {
        succ[a].push(b);
    }
    (0..n)
        .map(|s| {
            let mut seen = FixedBitSet::with_capacity(n);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &succ[u] {
                    if !seen.contains(v) {
                        seen.insert(v);
                        queue.push_back(v);
                    }
                }
            }
            seen
        })
        .collect()
}

/// Adjacency sorted by target; parallel edges keep the smallest kind.
fn adjacency(n: usize, edges: impl Iterator<Item = (usize, usize, EdgeKind)>) -> Vec<Vec<(usize, EdgeKind)>> {
    let mut adj = vec![Vec::new(); n];
    for (a, b, k) in edges {
        adj[a].push((b, k));
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup_by_key(|e| e.0);
    }
    adj
}

/// Shortest path from `from` to `to` (at least one edge), BFS in id order.
fn shortest_path(adj: &[Vec<(usize, EdgeKind)>], from: usize, to: usize) -> Option<Vec<CycleStep>> {
    let n = adj.len();
    let mut parent: Vec<Option<(usize, EdgeKind)>> = vec![None; n];
    let mut seen = FixedBitSet::with_capacity(n);
    let mut queue = VecDeque::from([from]);
    let mut closing = None;
    'bfs: while let Some(u) = queue.pop_front() {
        for &(v, k) in &adj[u] {
            if v == to {
                closing = Some((u, k));
                break 'bfs;
            }
            if !seen.contains(v) && v != from {
                seen.insert(v);
                parent[v] = Some((u, k));
                queue.push_back(v);
            }
        }
    }
    let (mut u, k) = closing?;
    let mut rev = vec![CycleStep { event: to, edge: None }, CycleStep { event: u, edge: Some(k) }];
    while u != from {
        let (p, k) = parent[u].unwrap();
        rev.push(CycleStep { event: p, edge: Some(k) });
        u = p;
    }
    rev.reverse();
    Some(rev)
}

/// Shortest cycle overall; ties go to the smallest starting event.
fn shortest_cycle(adj: &[Vec<(usize, EdgeKind)>]) -> Option<Vec<CycleStep>> {
    let mut best: Option<Vec<CycleStep>> = None;
    for s in 0..adj.len() {
        if let Some(c) = shortest_path(adj, s, s) {
            if best.as_ref().is_none_or(|b| c.len() < b.len()) {
                best = Some(c);
            }
        }
    }
    best
}

pub(crate) fn base_edges(g: &ExecutionGraph) -> impl Iterator<Item = (usize, usize, EdgeKind)> + '_ {
    g.po.iter().map(|&(a, b)| (a, b, EdgeKind::Po)).chain(g.rf.iter().map(|&(a, b)| (a, b, EdgeKind::Rf)))
}

pub(crate) fn co_edges(g: &ExecutionGraph, var: Option<usize>) -> Vec<(usize, usize, EdgeKind)> {
    let on = |x: usize| var.is_none_or(|v| v == x);
    let mut out: Vec<_> =
        g.co.iter().filter(|&&(a, _)| on(g.events[a].var)).map(|&(a, b)| (a, b, EdgeKind::Co)).collect();
    for init in g.events.iter().filter(|e| e.kind == EventKind::Init && on(e.var)) {
        for w in g.events.iter().filter(|e| e.kind == EventKind::Write && e.var == init.var) {
            out.push((init.id, w.id, EdgeKind::Co));
        }
    }
    out
}

/// Passes iff `(po ∪ rf)+` is irreflexive.
pub fn check_hb_acyclic(g: &ExecutionGraph) -> Result<(), CycleWitness> {
    let adj = adjacency(g.events.len(), base_edges(g));
    match shortest_cycle(&adj) {
        None => Ok(()),
        Some(cycle) => Err(CycleWitness { relation: Relation::Hb, cycle }),
    }
}

/// Passes iff no read `r` reads from a write `w'` while some write `w` on the
/// same variable satisfies `w' hb w hb r`.
pub fn check_wra(g: &ExecutionGraph) -> Result<(), CycleWitness> {
    let n = g.events.len();
    let reach = reachability(n, g.po.iter().chain(&g.rf).copied());
    let adj = adjacency(n, base_edges(g));
    let mut best: Option<(usize, usize, usize, usize, Vec<CycleStep>)> = None;
    for &(source, read) in &g.rf {
        let var = g.events[source].var;
        for w in g.events.iter().filter(|e| e.is_write() && e.var == var) {
            if !(reach[source].contains(w.id) && reach[w.id].contains(read)) {
                continue;
            }
            let mut cycle = shortest_path(&adj, source, w.id).unwrap();
            cycle.pop();
            let mut tail = shortest_path(&adj, w.id, read).unwrap();
            tail.last_mut().unwrap().edge = Some(EdgeKind::RfInverse);
            cycle.extend(tail);
            cycle.push(CycleStep { event: source, edge: None });
            let key = (cycle.len(), read, w.id, source);
            if best.as_ref().is_none_or(|b| key < (b.0, b.1, b.2, b.3)) {
                best = Some((key.0, key.1, key.2, key.3, cycle));
            }
        }
    }
    match best {
        None => Ok(()),
        Some((_, read, intervening, source, cycle)) => {
            Err(CycleWitness { relation: Relation::Wra { source, intervening, read }, cycle })
        }
    }
}

/// Passes iff `(po ∪ rf ∪ co_x)+` is irreflexive for every variable `x`.
pub fn check_ra(g: &ExecutionGraph) -> Result<(), CycleWitness> {
    let mut best: Option<(usize, Vec<CycleStep>)> = None;
    for var in 0..g.vars {
        let edges = base_edges(g).chain(co_edges(g, Some(var)));
        let adj = adjacency(g.events.len(), edges);
        if let Some(c) = shortest_cycle(&adj) {
            if best.as_ref().is_none_or(|b| c.len() < b.1.len()) {
                best = Some((var, c));
            }
        }
    }
    match best {
        None => Ok(()),
        Some((var, cycle)) => Err(CycleWitness { relation: Relation::Ra { var }, cycle }),
    }
}

/// Passes iff `(po ∪ rf ∪ co)+` is acyclic.
pub fn check_sra(g: &ExecutionGraph) -> Result<(), CycleWitness> {
    let edges = base_edges(g).chain(co_edges(g, None));
    let adj = adjacency(g.events.len(), edges);
    match shortest_cycle(&adj) {
        None => Ok(()),
        Some(cycle) => Err(CycleWitness { relation: Relation::Sra, cycle }),
    }
}

pub fn check_model(g: &ExecutionGraph, model: Model) -> Result<(), CycleWitness> {
    match model {
        Model::Wra => check_wra(g),
        Model::Ra => check_ra(g),
        Model::Sra => check_sra(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egraph::Event;
    use crate::machine::Value::{self, Init, Token};

    fn ev(id: usize, kind: EventKind, thread: Option<usize>, var: usize, value: Value) -> Event {
        Event { id, kind, thread, var, value }
    }

    fn m1_run_graph() -> ExecutionGraph {
        let mut g = ExecutionGraph::init_graph(1);
        g.add_write(0, 0, Token(1)).unwrap();
        g.add_write(0, 0, Token(2)).unwrap();
        g.add_write(1, 0, Token(3)).unwrap();
        g.add_read(1, 0, Token(2)).unwrap();
        g.add_read(0, 0, Token(3)).unwrap();
        g
    }

    fn not_wra() -> ExecutionGraph {
        let mut g = ExecutionGraph::init_graph(2);
        g.add_write(0, 0, Token(1)).unwrap();
        g.add_write(0, 0, Token(2)).unwrap();
        g.add_write(0, 1, Token(3)).unwrap();
        g.add_read(1, 1, Token(3)).unwrap();
        g.add_read(1, 0, Token(1)).unwrap();
        g
    }

    #[test]
    fn cyclic_hb_graph() {
        // θ: R(x)=2 ; W(y)=1   φ: R(y)=1 ; W(x)=2
        let events = vec![
            ev(0, EventKind::Init, None, 0, Init),
            ev(1, EventKind::Init, None, 1, Init),
            ev(2, EventKind::Read, Some(0), 0, Token(2)),
            ev(3, EventKind::Write, Some(0), 1, Token(1)),
            ev(4, EventKind::Read, Some(1), 1, Token(1)),
            ev(5, EventKind::Write, Some(1), 0, Token(2)),
        ];
        let g = ExecutionGraph::from_parts(events, [(2, 3), (4, 5)], [(5, 2), (3, 4)], []).unwrap();
        let w = check_hb_acyclic(&g).unwrap_err();
        assert_eq!(w.len(), 4);
        assert_eq!(w.events().collect::<Vec<_>>(), [2, 3, 4, 5]);
        assert!(w.is_valid_in(&g));
    }

    #[test]
    fn generated_and_single_thread_graphs_have_acyclic_hb() {
        assert!(check_hb_acyclic(&m1_run_graph()).is_ok());
        let mut g = ExecutionGraph::init_graph(1);
        g.add_write(0, 0, Token(1)).unwrap();
        g.add_read(0, 0, Token(1)).unwrap();
        assert!(check_hb_acyclic(&g).is_ok());
    }

    #[test]
    fn wra_violation_on_not_wra_graph() {
        let g = not_wra();
        let w = check_wra(&g).unwrap_err();
        // events: 0,1 init; 2=e1 3=e2 4=e3 5=e4 6=e5
        assert_eq!(w.relation, Relation::Wra { source: 2, intervening: 3, read: 6 });
        assert!(w.is_valid_in(&g));
        assert_eq!(w.cycle.last().unwrap().event, 2);
    }

    #[test]
    fn m1_run_passes_wra_fails_ra_and_sra() {
        let g = m1_run_graph();
        assert!(check_wra(&g).is_ok());
        let w = check_ra(&g).unwrap_err();
        assert_eq!(w.relation, Relation::Ra { var: 0 });
        assert_eq!(w.len(), 2);
        assert!(w.cycle.iter().take(2).all(|s| s.edge == Some(EdgeKind::Co)));
        assert!(w.is_valid_in(&g));
        assert!(check_sra(&g).is_err());
    }

    #[test]
    fn single_write_single_read_is_consistent() {
        let mut g = ExecutionGraph::init_graph(1);
        g.add_write(0, 0, Token(1)).unwrap();
        g.add_read(1, 0, Token(1)).unwrap();
        for m in Model::ALL {
            assert!(check_model(&g, m).is_ok());
        }
    }

    /// 2+2W: θ W(x)=1 W(y)=2 R(y)=3 ; φ W(y)=3 W(x)=4 R(x)=1
    fn two_plus_two_w() -> ExecutionGraph {
        let (x, y) = (0, 1);
        let mut g = ExecutionGraph::init_graph(2);
        g.add_write(0, x, Token(1)).unwrap();
        g.add_write(0, y, Token(2)).unwrap();
        g.add_write(1, y, Token(3)).unwrap();
        g.add_write(1, x, Token(4)).unwrap();
        g.add_read(0, y, Token(3)).unwrap();
        g.add_read(1, x, Token(1)).unwrap();
        g
    }

    #[test]
    fn ra_but_not_sra() {
        let g = two_plus_two_w();
        assert!(check_wra(&g).is_ok());
        assert!(check_ra(&g).is_ok());
        let w = check_sra(&g).unwrap_err();
        assert_eq!(w.len(), 4);
        assert!(w.is_valid_in(&g));
    }

    #[test]
    fn stale_init_read_is_a_coherence_cycle() {
        let mut g = ExecutionGraph::init_graph(1);
        g.add_write(0, 0, Token(1)).unwrap();
        g.add_read(0, 0, Init).unwrap();
        assert!(check_wra(&g).is_ok());
        let w = check_ra(&g).unwrap_err();
        assert_eq!(w.len(), 2);
        assert!(w.is_valid_in(&g));
    }
}
