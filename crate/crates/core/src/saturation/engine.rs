//! A backward worklist over per-state facts. Each fact is derived from at
//! most one premise and one transition, so processing a fact means looking
//! at the transitions entering its state.

use std::collections::VecDeque;

use super::{Rule, SaturationOptions};
use crate::machine::{RegisterMachine, Transition};

pub(super) enum Conclusion<F> {
    Fact(usize, F),
    /// Failure flagged at the given state.
    Fail(usize),
}

#[derive(Debug, Clone, Copy)]
pub(super) struct Origin {
    pub rule: Rule,
    pub transition: Option<usize>,
    pub premise: Option<usize>,
}

pub(super) struct Failure {
    pub rule: Rule,
    pub transition: Option<usize>,
    pub premise: usize,
    pub state: usize,
}

/// Dense slot of a fact at a state.
type SlotFn<'m, F> = Box<dyn Fn(usize, &F) -> usize + 'm>;

pub(super) struct Engine<'m, F> {
    pub m: &'m RegisterMachine,
    pub facts: Vec<(usize, F)>,
    pub origins: Vec<Origin>,
    pub failure: Option<Failure>,
    slots: Vec<u32>,
    index: SlotFn<'m, F>,
    queue: VecDeque<usize>,
    incoming: Vec<Vec<usize>>,
    order: Vec<usize>,
    lifo: bool,
    stop_at_fail: bool,
}

const EMPTY: u32 = u32::MAX;

impl<'m, F: Copy> Engine<'m, F> {
    pub fn new(
        m: &'m RegisterMachine,
        capacity: usize,
        index: impl Fn(usize, &F) -> usize + 'm,
        opts: &SaturationOptions,
    ) -> Self {
        let order = match &opts.transition_order {
            Some(o) => o.clone(),
            None => (0..m.transitions.len()).collect(),
        };
        let mut incoming = vec![Vec::new(); m.states.len()];
        for &i in &order {
            incoming[m.transitions[i].to].push(i);
        }
        Engine {
            m,
            facts: Vec::new(),
            origins: Vec::new(),
            failure: None,
            slots: vec![EMPTY; capacity],
            index: Box::new(index),
            queue: VecDeque::new(),
            incoming,
            order,
            lifo: opts.lifo,
            stop_at_fail: !opts.full_fixpoint,
        }
    }

    /// Transitions in iteration order.
    pub fn transitions(&self) -> impl Iterator<Item = &'m Transition> + '_ {
        let m = self.m;
        self.order.iter().map(move |&i| &m.transitions[i])
    }

    fn stopped(&self) -> bool {
        self.failure.is_some() && self.stop_at_fail
    }

    pub fn add(&mut self, c: Conclusion<F>, origin: Origin) {
        match c {
            Conclusion::Fact(state, fact) => {
                let slot = (self.index)(state, &fact);
                if self.slots[slot] == EMPTY {
                    self.slots[slot] = self.facts.len() as u32;
                    self.queue.push_back(self.facts.len());
                    self.facts.push((state, fact));
                    self.origins.push(origin);
                }
            }
            Conclusion::Fail(state) => {
                if self.failure.is_none() {
                    self.failure = Some(Failure {
                        rule: origin.rule,
                        transition: origin.transition,
                        premise: origin.premise.expect("failure has a premise"),
                        state,
                    });
                }
            }
        }
    }

    /// Runs to the fixed point (or the first failure when so configured).
    /// `fire` lists the conclusions of one premise across one transition;
    /// `check` may flag a failure directly on a new fact.
    pub fn saturate(
        &mut self,
        fire: impl Fn(&Transition, usize, &F, &mut Vec<(Rule, Conclusion<F>)>),
        check: impl Fn(usize, &F) -> Option<Rule>,
    ) {
        let mut out = Vec::new();
        let mut checked = 0;
        loop {
            while checked < self.facts.len() {
                let (state, fact) = self.facts[checked];
                if let Some(rule) = check(state, &fact) {
                    self.add(Conclusion::Fail(state), Origin { rule, transition: None, premise: Some(checked) });
                }
                checked += 1;
            }
            if self.stopped() {
                return;
            }
            let next = if self.lifo { self.queue.pop_back() } else { self.queue.pop_front() };
            let Some(id) = next else { return };
            let (state, fact) = self.facts[id];
            for k in 0..self.incoming[state].len() {
                let t = &self.m.transitions[self.incoming[state][k]];
                fire(t, state, &fact, &mut out);
                for (rule, c) in out.drain(..) {
                    self.add(c, Origin { rule, transition: Some(t.index), premise: Some(id) });
                    if self.stopped() {
                        return;
                    }
                }
            }
        }
    }
}
