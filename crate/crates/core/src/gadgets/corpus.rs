//! Reference machines used throughout the tests and examples.

use crate::machine::{MachineBuilder, RegisterMachine};

/// Violates WRA through a hidden read: `theta` writes `x` from `a`, then
/// overwrites it from `b`, then publishes `y`; `phi` reads `y` and can still
/// output the stale `a` on `x`. The leading write initialises `c`.
pub fn example1() -> RegisterMachine {
    MachineBuilder::new("example1")
        .initial("s")
        .write("s", "q0", "theta", "y", "c")
        .write("q0", "q1", "theta", "x", "a")
        .write("q1", "q1", "theta", "x", "b")
        .write("q1", "q1", "theta", "y", "c")
        .read("q1", "q2", "phi", "y", "c")
        .read("q2", "q2", "phi", "x", "a")
        .build()
}

/// Satisfies WRA but not RA: two threads each keep reading the other's
/// write after overwriting. Entered through `s` so that `a` is written
/// before any read.
pub fn m1() -> RegisterMachine {
    MachineBuilder::new("m1")
        .initial("s")
        .write("s", "q1", "theta", "x", "a")
        .write("q0", "q1", "theta", "x", "a")
        .write("q1", "q1", "theta", "x", "a")
        .write("q1", "q0", "phi", "x", "b")
        .read("q0", "q0", "theta", "x", "b")
        .read("q0", "q0", "phi", "x", "a")
        .build()
}

/// Outputs `a2` on `x` before ever writing it, and can later output on `x`
/// a value input on `y`.
pub fn ghost_read_machine() -> RegisterMachine {
    MachineBuilder::new("ghost_read")
        .write("q0", "q1", "t1", "x", "a1")
        .read("q1", "q2", "t2", "x", "a1")
        .read("q2", "q3", "t1", "x", "a2")
        .write("q2", "q0", "t2", "y", "a2")
        .build()
}

/// A copied value is read back after an overwrite: RA fails, WRA holds.
pub fn exra() -> RegisterMachine {
    MachineBuilder::new("exra")
        .write("q0", "q1", "t1", "x", "a1")
        .copy("q1", "q2", "b", "a1")
        .write("q2", "q3", "t2", "x", "a1")
        .read("q3", "q4", "t2", "x", "b")
        .read("q4", "q5", "t1", "x", "a1")
        .build()
}
