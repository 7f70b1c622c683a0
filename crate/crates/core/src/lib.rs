//! Verification of register machines against the weak release-acquire
//! family of memory models (WRA, RA, SRA).

#![forbid(unsafe_code)]

pub mod cli;
pub mod egraph;
pub mod explore;
pub mod gadgets;
pub mod machine;
pub mod saturation;
