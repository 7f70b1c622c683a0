use std::fmt;

use thiserror::Error;

/// Largest formula [`Formula::brute_force`] accepts.
pub const MAX_BRUTE_FORCE_VARS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

/// How clauses combine: a disjunction of conjunctions, or the converse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    Dnf,
    Cnf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub form: Form,
    /// Variable names in order of first appearance.
    pub vars: Vec<String>,
    pub clauses: Vec<Vec<Literal>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("formula has no clauses")]
    Empty,
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("clause {clause} has {len} literals; at most 3 are allowed")]
    ClauseTooLong { clause: usize, len: usize },
    #[error("unexpected `{found}` at offset {offset}")]
    Unexpected { offset: usize, found: String },
    #[error("{0} variables exceed the truth-table limit of {MAX_BRUTE_FORCE_VARS}")]
    TooManyVariables(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub tautology: bool,
    pub satisfiable: bool,
    /// First falsifying assignment in counting order, if any.
    pub falsifier: Option<Vec<bool>>,
    /// First satisfying assignment in counting order, if any.
    pub satisfier: Option<Vec<bool>>,
}

impl Formula {
    /// Parses `z & !y | !z & y` (DNF) or `(a | b) & !c` (CNF). Clauses may
    /// be parenthesised.
    pub fn parse(text: &str, form: Form) -> Result<Formula, FormulaError> {
        let (outer, inner) = match form {
            Form::Dnf => ('|', '&'),
            Form::Cnf => ('&', '|'),
        };
        let mut vars: Vec<String> = Vec::new();
        let mut clauses = Vec::new();
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut i = 0;
        let skip_ws = |i: &mut usize| {
            while *i < chars.len() && chars[*i].1.is_whitespace() {
                *i += 1;
            }
        };
        let unexpected = |i: usize| FormulaError::Unexpected {
            offset: chars.get(i).map_or(text.len(), |c| c.0),
            found: chars.get(i).map_or("end of input".into(), |c| c.1.to_string()),
        };
        skip_ws(&mut i);
        if i == chars.len() {
            return Err(FormulaError::Empty);
        }
        loop {
            skip_ws(&mut i);
            let paren = i < chars.len() && chars[i].1 == '(';
            if paren {
                i += 1;
            }
            let mut clause = Vec::new();
            loop {
                skip_ws(&mut i);
                let mut positive = true;
                while i < chars.len() && chars[i].1 == '!' {
                    positive = !positive;
                    i += 1;
                    skip_ws(&mut i);
                }
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                if start == i || chars[start].1.is_ascii_digit() {
                    return Err(unexpected(start));
                }
                let name: String = chars[start..i].iter().map(|c| c.1).collect();
                let var = vars.iter().position(|v| *v == name).unwrap_or_else(|| {
                    vars.push(name);
                    vars.len() - 1
                });
                clause.push(Literal { var, positive });
                skip_ws(&mut i);
                if i < chars.len() && chars[i].1 == inner {
                    i += 1;
                } else {
                    break;
                }
            }
            if paren {
                if i < chars.len() && chars[i].1 == ')' {
                    i += 1;
                    skip_ws(&mut i);
                } else {
                    return Err(unexpected(i));
                }
            }
            if clause.len() > 3 {
                return Err(FormulaError::ClauseTooLong { clause: clauses.len(), len: clause.len() });
            }
            clauses.push(clause);
            if i == chars.len() {
                break;
            }
            if chars[i].1 == outer {
                i += 1;
            } else {
                return Err(unexpected(i));
            }
        }
        Ok(Formula { form, vars, clauses })
    }

    /// Builds a formula over variables `v0, v1, ...`.
    pub fn new(form: Form, var_count: usize, clauses: Vec<Vec<Literal>>) -> Result<Formula, FormulaError> {
        if clauses.is_empty() {
            return Err(FormulaError::Empty);
        }
        for (i, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(FormulaError::EmptyClause(i));
            }
            if c.len() > 3 {
                return Err(FormulaError::ClauseTooLong { clause: i, len: c.len() });
            }
        }
        let vars = (0..var_count).map(|i| format!("v{i}")).collect();
        Ok(Formula { form, vars, clauses })
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        let lit = |l: &Literal| assignment[l.var] == l.positive;
        match self.form {
            Form::Dnf => self.clauses.iter().any(|c| c.iter().all(lit)),
            Form::Cnf => self.clauses.iter().all(|c| c.iter().any(lit)),
        }
    }

    pub fn brute_force(&self) -> Result<TruthTable, FormulaError> {
        let n = self.vars.len();
        if n > MAX_BRUTE_FORCE_VARS {
            return Err(FormulaError::TooManyVariables(n));
        }
        let (mut falsifier, mut satisfier) = (None, None);
        for bits in 0u32..(1 << n) {
            let a: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            let slot = if self.eval(&a) { &mut satisfier } else { &mut falsifier };
            if slot.is_none() {
                *slot = Some(a);
            }
            if falsifier.is_some() && satisfier.is_some() {
                break;
            }
        }
        Ok(TruthTable { tautology: falsifier.is_none(), satisfiable: satisfier.is_some(), falsifier, satisfier })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (outer, inner) = match self.form {
            Form::Dnf => (" | ", " & "),
            Form::Cnf => (" & ", " | "),
        };
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(outer)?;
            }
            if self.clauses.len() > 1 && c.len() > 1 {
                f.write_str("(")?;
            }
            for (j, l) in c.iter().enumerate() {
                if j > 0 {
                    f.write_str(inner)?;
                }
                write!(f, "{}{}", if l.positive { "" } else { "!" }, self.vars[l.var])?;
            }
            if self.clauses.len() > 1 && c.len() > 1 {
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}
