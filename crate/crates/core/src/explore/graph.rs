//! Execution graph specialised for depth-first search: events carry their
//! happens-before predecessors as bitsets, and every change can be rolled
//! back to a checkpoint.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use crate::egraph::{EventKind, Model};

enum Undo {
    Event,
    Last(usize, Option<usize>),
    Edge(usize),
    WriteOn(usize),
    Token,
}

pub(super) struct SearchGraph {
    kind: Vec<EventKind>,
    var: Vec<usize>,
    preds: Vec<FixedBitSet>,
    /// Latest event of each thread.
    last: Vec<Option<usize>>,
    /// Explicit `po`/`rf` edges (tag `None`) and `co` edges (tag `Some(var)`).
    succ: Vec<Vec<(usize, Option<usize>)>>,
    writes_on: Vec<Vec<usize>>,
    token_event: Vec<usize>,
    log: Vec<Undo>,
    capacity: usize,
}

impl SearchGraph {
    pub fn new(threads: usize, vars: usize, max_events: usize) -> Self {
        let capacity = vars + max_events;
        let mut g = SearchGraph {
            kind: Vec::new(),
            var: Vec::new(),
            preds: Vec::new(),
            last: vec![None; threads],
            succ: Vec::new(),
            writes_on: vec![Vec::new(); vars],
            token_event: Vec::new(),
            log: Vec::new(),
            capacity,
        };
        for x in 0..vars {
            g.kind.push(EventKind::Init);
            g.var.push(x);
            g.preds.push(FixedBitSet::with_capacity(capacity));
            g.succ.push(Vec::new());
        }
        g.log.clear();
        g
    }

    pub fn checkpoint(&self) -> usize {
        self.log.len()
    }

    pub fn rollback(&mut self, checkpoint: usize) {
        while self.log.len() > checkpoint {
            match self.log.pop().unwrap() {
                Undo::Event => {
                    self.kind.pop();
                    self.var.pop();
                    self.preds.pop();
                    self.succ.pop();
                }
                Undo::Last(t, prev) => self.last[t] = prev,
                Undo::Edge(from) => {
                    self.succ[from].pop();
                }
                Undo::WriteOn(x) => {
                    self.writes_on[x].pop();
                }
                Undo::Token => {
                    self.token_event.pop();
                }
            }
        }
    }

    fn edge(&mut self, from: usize, to: usize, tag: Option<usize>) {
        self.succ[from].push((to, tag));
        self.log.push(Undo::Edge(from));
    }

    fn push_event(&mut self, kind: EventKind, thread: usize, var: usize) -> usize {
        let id = self.kind.len();
        let mut preds = FixedBitSet::with_capacity(self.capacity);
        if let Some(p) = self.last[thread] {
            preds.union_with(&self.preds[p]);
            preds.insert(p);
        }
        self.kind.push(kind);
        self.var.push(var);
        self.preds.push(preds);
        self.succ.push(Vec::new());
        self.log.push(Undo::Event);
        if let Some(p) = self.last[thread] {
            self.edge(p, id, None);
        }
        self.log.push(Undo::Last(thread, self.last[thread]));
        self.last[thread] = Some(id);
        id
    }

    /// Appends the write minting the next token.
    pub fn add_write(&mut self, thread: usize, var: usize) {
        let id = self.push_event(EventKind::Write, thread, var);
        self.writes_on[var].push(id);
        self.log.push(Undo::WriteOn(var));
        self.token_event.push(id);
        self.log.push(Undo::Token);
    }

    /// Event that wrote `token`.
    pub fn source_of(&self, token: u32) -> usize {
        self.token_event[token as usize - 1]
    }

    pub fn var_of(&self, event: usize) -> usize {
        self.var[event]
    }

    /// Appends a read from `source` and reports whether the graph now
    /// violates `model`. Only cycles through the new read's edges are
    /// examined; earlier prefixes were checked when they were built.
    pub fn add_read(&mut self, thread: usize, var: usize, source: usize, model: Model) -> bool {
        let r = self.push_event(EventKind::Read, thread, var);
        let src_preds = self.preds[source].clone();
        self.preds[r].union_with(&src_preds);
        self.preds[r].insert(source);
        self.edge(source, r, None);
        let before: Vec<usize> =
            self.writes_on[var].iter().copied().filter(|&w| w != source && self.preds[r].contains(w)).collect();
        for &w in &before {
            self.edge(w, source, Some(var));
        }
        match model {
            Model::Wra => before.iter().any(|&w| self.preds[w].contains(source)),
            Model::Ra => self.reaches_any(source, &before, Some(var)),
            Model::Sra => self.reaches_any(source, &before, None),
        }
    }

    /// Whether `from` reaches one of `targets` over `po ∪ rf ∪ co` (`co`
    /// restricted to `only` when given), counting the implicit edges from
    /// initial writes.
    fn reaches_any(&self, from: usize, targets: &[usize], only: Option<usize>) -> bool {
        if targets.is_empty() {
            return false;
        }
        let allowed = |tag: Option<usize>| tag.is_none() || only.is_none() || tag == only;
        let mut seen = FixedBitSet::with_capacity(self.kind.len());
        let mut queue = VecDeque::from([from]);
        seen.insert(from);
        while let Some(u) = queue.pop_front() {
            let implicit = (self.kind[u] == EventKind::Init && allowed(Some(self.var[u])))
                .then(|| self.writes_on[self.var[u]].iter().map(|&w| (w, None)))
                .into_iter()
                .flatten();
            for (v, tag) in self.succ[u].iter().copied().chain(implicit) {
                if !allowed(tag) || seen.contains(v) {
                    continue;
                }
                if targets.contains(&v) {
                    return true;
                }
                seen.insert(v);
                queue.push_back(v);
            }
        }
        false
    }

    /// Canonical summary of everything a future WRA, ghost or mismatch
    /// violation depends on: register contents up to renaming, the variable
    /// of each held value, and for every thread and held value whether it
    /// has seen each held value and an overwrite of it.
    pub fn wra_key(&self, state: usize, regs: &[Option<u32>]) -> Vec<u8> {
        let mut classes: Vec<usize> = Vec::new();
        let mut key = Vec::with_capacity(64);
        key.extend_from_slice(&(state as u32).to_le_bytes());
        for r in regs {
            match r {
                None => key.push(0),
                Some(tok) => {
                    let e = self.source_of(*tok);
                    let k = classes.iter().position(|&c| c == e).unwrap_or_else(|| {
                        classes.push(e);
                        classes.len() - 1
                    });
                    key.push(k as u8 + 1);
                }
            }
        }
        for &k in &classes {
            key.push(self.var[k] as u8);
        }
        let seen_overwrite = |k: usize, view: &dyn Fn(usize) -> bool| {
            self.writes_on[self.var[k]].iter().any(|&w| view(w) && self.preds[w].contains(k))
        };
        let mut bits: u64 = 0;
        let mut n = 0;
        let mut push = |b: bool| {
            if n == 64 {
                key.extend_from_slice(&bits.to_le_bytes());
                bits = 0;
                n = 0;
            }
            bits |= u64::from(b) << n;
            n += 1;
        };
        for t in 0..self.last.len() {
            let view = |e: usize| self.last[t].is_some_and(|l| l == e || self.preds[l].contains(e));
            for &k in &classes {
                push(view(k));
                push(seen_overwrite(k, &view));
            }
        }
        for &v in &classes {
            let view = |e: usize| e == v || self.preds[v].contains(e);
            for &k in &classes {
                push(view(k));
                push(seen_overwrite(k, &view));
            }
        }
        key.extend_from_slice(&bits.to_le_bytes());
        key
    }
}
