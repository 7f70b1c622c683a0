//! Litmus patterns as straight-line machines. Each machine is a single
//! chain of transitions, so its only run is the pattern itself (and its
//! prefixes) and exploration is exhaustive.

use thiserror::Error;

use crate::egraph::Model;
use crate::machine::{MachineBuilder, RegisterMachine};

#[derive(Debug, Clone, Copy)]
pub struct LitmusSpec {
    pub name: &'static str,
    /// Weakest model the pattern violates.
    pub expected: Option<Model>,
    pub summary: &'static str,
    pub build: fn() -> RegisterMachine,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown litmus test `{0}`")]
pub struct UnknownLitmus(pub String);

#[derive(Clone, Copy)]
enum S {
    W(&'static str, &'static str, &'static str),
    R(&'static str, &'static str, &'static str),
}

fn chain(name: &str, steps: &[S]) -> RegisterMachine {
    let mut b = MachineBuilder::new(name);
    b.initial("q0");
    for (i, s) in steps.iter().enumerate() {
        let (from, to) = (format!("q{i}"), format!("q{}", i + 1));
        match *s {
            S::W(t, x, r) => b.write(&from, &to, t, x, r),
            S::R(t, x, r) => b.read(&from, &to, t, x, r),
        };
    }
    b.build()
}

use S::{R, W};

fn mp() -> RegisterMachine {
    chain("mp", &[W("t1", "x", "c"), W("t1", "x", "a"), W("t1", "y", "b"), R("t2", "y", "b"), R("t2", "x", "c")])
}

fn mp_trans() -> RegisterMachine {
    chain(
        "mp_trans",
        &[
            W("t1", "x", "c"),
            W("t1", "x", "a"),
            W("t1", "y", "b"),
            R("t2", "y", "b"),
            W("t2", "z", "d"),
            R("t3", "z", "d"),
            R("t3", "x", "c"),
        ],
    )
}

fn sb() -> RegisterMachine {
    chain(
        "sb",
        &[
            W("t0", "x", "c"),
            W("t0", "y", "d"),
            W("t1", "x", "a"),
            W("t2", "y", "b"),
            R("t1", "y", "d"),
            R("t2", "x", "c"),
        ],
    )
}

fn sf() -> RegisterMachine {
    chain("sf", &[W("t1", "x", "a"), R("t1", "x", "a"), W("t2", "x", "b"), R("t1", "x", "b"), R("t2", "x", "a")])
}

fn ww() -> RegisterMachine {
    chain("ww", &[W("t1", "x", "a"), W("t2", "x", "b"), R("t1", "x", "b"), R("t3", "x", "b"), R("t3", "x", "a")])
}

fn out_of_order_reads() -> RegisterMachine {
    chain(
        "out_of_order_reads",
        &[
            W("t1", "x", "a"),
            W("t2", "x", "b"),
            R("t3", "x", "a"),
            R("t3", "x", "b"),
            R("t4", "x", "b"),
            R("t4", "x", "a"),
        ],
    )
}

fn two_plus_two_w() -> RegisterMachine {
    chain(
        "two_plus_two_w",
        &[
            W("t1", "x", "a"),
            W("t1", "y", "b"),
            W("t2", "y", "c"),
            W("t2", "x", "d"),
            R("t1", "y", "c"),
            R("t2", "x", "a"),
        ],
    )
}

fn oscillating() -> RegisterMachine {
    chain(
        "oscillating",
        &[
            W("t1", "x", "a1"),
            W("t1", "y", "b1"),
            W("t2", "y", "b2"),
            W("t2", "z", "c2"),
            W("t3", "z", "c3"),
            W("t3", "x", "a3"),
            R("t1", "y", "b2"),
            R("t2", "z", "c3"),
            R("t3", "x", "a1"),
        ],
    )
}

fn ww_mp() -> RegisterMachine {
    chain(
        "ww_mp",
        &[
            W("t1", "x", "a"),
            W("t1", "x", "c"),
            W("t1", "y", "b"),
            R("t2", "y", "b"),
            R("t2", "x", "c"),
            W("t2", "x", "d"),
            R("t2", "x", "d"),
        ],
    )
}

const SPECS: [LitmusSpec; 9] = [
    LitmusSpec {
        name: "mp",
        expected: Some(Model::Wra),
        summary: "message passing: a flag read does not publish the data written before it",
        build: mp,
    },
    LitmusSpec {
        name: "mp-trans",
        expected: Some(Model::Wra),
        summary: "message passing relayed through a third thread",
        build: mp_trans,
    },
    LitmusSpec {
        name: "sb",
        expected: None,
        summary: "store buffering: both threads miss the other's write",
        build: sb,
    },
    LitmusSpec {
        name: "sf",
        expected: Some(Model::Ra),
        summary: "store forwarding: two threads disagree on the order of two writes",
        build: sf,
    },
    LitmusSpec {
        name: "ww",
        expected: Some(Model::Ra),
        summary: "write-write: a reader sees two writes in the opposite order",
        build: ww,
    },
    LitmusSpec { name: "ww-mp", expected: None, summary: "message passing followed by an own overwrite", build: ww_mp },
    LitmusSpec {
        name: "2+2w",
        expected: Some(Model::Sra),
        summary: "two threads write two variables in opposite orders",
        build: two_plus_two_w,
    },
    LitmusSpec {
        name: "oscillating",
        expected: Some(Model::Sra),
        summary: "three threads whose cross-variable coherence forms a ring",
        build: oscillating,
    },
    LitmusSpec {
        name: "out-of-order-reads",
        expected: Some(Model::Ra),
        summary: "two readers observe two writes in opposite orders",
        build: out_of_order_reads,
    },
];

pub fn litmus_specs() -> &'static [LitmusSpec] {
    &SPECS
}

/// Accepts names case-insensitively, with `_` for `-`.
pub fn litmus(name: &str) -> Result<LitmusSpec, UnknownLitmus> {
    let wanted = name.to_ascii_lowercase().replace('_', "-");
    SPECS.iter().find(|s| s.name == wanted).copied().ok_or_else(|| UnknownLitmus(name.to_string()))
}
