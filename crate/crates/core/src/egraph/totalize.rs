use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use super::check::{base_edges, co_edges};
use super::{check_model, CycleWitness, EventKind, ExecutionGraph, Model};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TotalizeError {
    #[error("graph violates {0}")]
    Precondition(Model, CycleWitness),
    #[error("po ∪ rf ∪ co is cyclic; no total coherence order extends it")]
    Cyclic,
}

/// Topological order of all events, smallest id first among ready events.
fn topo_order(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut succ = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(a, b) in edges {
        succ[a].push(b);
        indeg[b] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &v in &succ[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(Reverse(v));
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Extends `co` to a total order on the writes of each variable such that
/// `model` still holds. Each variable's writes are ordered along a linear
/// extension of the relation the model keeps acyclic: `po ∪ rf ∪ co_x` for
/// RA, `po ∪ rf ∪ co` for SRA and WRA.
pub fn totalize_co(g: &ExecutionGraph, model: Model) -> Result<ExecutionGraph, TotalizeError> {
    check_model(g, model).map_err(|w| TotalizeError::Precondition(model, w))?;
    let n = g.events().len();
    let mut co = BTreeSet::new();
    let mut add_chain = |order: &[usize], var: usize| {
        let writes: Vec<usize> =
            order.iter().copied().filter(|&e| g.event(e).kind == EventKind::Write && g.event(e).var == var).collect();
        for (i, &a) in writes.iter().enumerate() {
            for &b in &writes[i + 1..] {
                co.insert((a, b));
            }
        }
    };
    match model {
        Model::Ra => {
            for var in 0..g.var_count() {
                let edges: Vec<_> = base_edges(g).chain(co_edges(g, Some(var))).map(|(a, b, _)| (a, b)).collect();
                let order = topo_order(n, &edges).ok_or(TotalizeError::Cyclic)?;
                add_chain(&order, var);
            }
        }
        Model::Sra | Model::Wra => {
            let edges: Vec<_> = base_edges(g).chain(co_edges(g, None)).map(|(a, b, _)| (a, b)).collect();
            let order = topo_order(n, &edges).ok_or(TotalizeError::Cyclic)?;
            for var in 0..g.var_count() {
                add_chain(&order, var);
            }
        }
    }
    let mut out = g.clone();
    out.co = co;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Value::Token;

    #[test]
    fn unordered_writes_become_total() {
        let mut g = ExecutionGraph::init_graph(1);
        let a = g.add_write(0, 0, Token(1)).unwrap();
        let b = g.add_write(1, 0, Token(2)).unwrap();
        let t = totalize_co(&g, Model::Ra).unwrap();
        assert_eq!(t.co().iter().copied().collect::<Vec<_>>(), [(a, b)]);
    }

    #[test]
    fn keeps_existing_co_and_respects_it() {
        // The not_wra graph already has a co_x cycle.
        let mut g = ExecutionGraph::init_graph(2);
        g.add_write(0, 0, Token(1)).unwrap();
        g.add_write(0, 0, Token(2)).unwrap();
        g.add_write(0, 1, Token(3)).unwrap();
        g.add_read(1, 1, Token(3)).unwrap();
        g.add_read(1, 0, Token(1)).unwrap();
        assert!(matches!(totalize_co(&g, Model::Ra), Err(TotalizeError::Precondition(Model::Ra, _))));
        assert!(matches!(totalize_co(&g, Model::Wra), Err(TotalizeError::Precondition(..))));
        // Same shape without the stale read is fine and orders e1 before e2.
        let mut h = ExecutionGraph::init_graph(1);
        let f1 = h.add_write(0, 0, Token(1)).unwrap();
        let f2 = h.add_write(1, 0, Token(2)).unwrap();
        h.add_read(0, 0, Token(2)).unwrap();
        h.add_read(1, 0, Token(2)).unwrap();
        let t = totalize_co(&h, Model::Sra).unwrap();
        assert!(t.co().contains(&(f1, f2)));
    }

    #[test]
    fn single_write_per_var_unchanged() {
        let mut g = ExecutionGraph::init_graph(2);
        g.add_write(0, 0, Token(1)).unwrap();
        g.add_write(1, 1, Token(2)).unwrap();
        g.add_read(1, 0, Token(1)).unwrap();
        assert_eq!(totalize_co(&g, Model::Ra).unwrap(), g);
    }
}
