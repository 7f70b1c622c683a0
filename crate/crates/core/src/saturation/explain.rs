use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use super::{Derived, Rule, Stage, StageVerdict};
use crate::machine::{RegisterMachine, Run};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("nothing to explain: the {0} stage passed")]
    NothingToExplain(Stage),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosticStep {
    pub rule: Rule,
    pub transition_index: Option<usize>,
    /// The transition in machine syntax.
    pub transition: Option<String>,
    pub premises: Vec<usize>,
    /// Rendered fact, or `FAIL`.
    pub fact: String,
    pub state: String,
}

/// A failed stage, rendered against its machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub stage: Stage,
    pub verdict: &'static str,
    pub facts_count: usize,
    pub derivation: Vec<DiagnosticStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_run: Option<Vec<String>>,
}

/// Linearizes the derivation of a failed stage. `witness`, when given, is a
/// concrete violating run confirmed by exploration.
pub fn explain(v: &StageVerdict, m: &RegisterMachine, witness: Option<&Run>) -> Result<Diagnostic, ExplainError> {
    let steps = v.failure.as_ref().ok_or(ExplainError::NothingToExplain(v.stage))?;
    let derivation = steps
        .iter()
        .map(|s| {
            let (fact, state) = match s.conclusion {
                Derived::Fact(f) => (f.render(m), f.state),
                Derived::Fail { state } => ("FAIL".to_string(), state),
            };
            DiagnosticStep {
                rule: s.rule,
                transition_index: s.transition,
                transition: s.transition.map(|t| m.describe(&m.transitions[t])),
                premises: s.premises.clone(),
                fact,
                state: m.states[state].clone(),
            }
        })
        .collect();
    Ok(Diagnostic {
        stage: v.stage,
        verdict: "fail",
        facts_count: v.facts_count(),
        derivation,
        witness_run: witness.map(|r| r.trace_lines(m)),
    })
}

impl Diagnostic {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("diagnostic serializes")
    }

    /// Numbered derivation steps followed by the witness run, if any.
    pub fn render(&self) -> String {
        let mut out = format!("{} stage failed ({} facts derived)\n", self.stage, self.facts_count);
        for (i, s) in self.derivation.iter().enumerate() {
            let _ = write!(out, "  {}. {} {}", i + 1, s.rule.circled(), s.fact);
            if s.fact == "FAIL" {
                let _ = write!(out, " at {}", s.state);
            }
            if let Some(t) = &s.transition {
                let _ = write!(out, "  [{t}]");
            }
            out.push('\n');
        }
        if let Some(run) = &self.witness_run {
            out.push_str("violating run:\n");
            for line in run {
                let _ = writeln!(out, "  {line}");
            }
        }
        out
    }
}
