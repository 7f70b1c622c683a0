use thiserror::Error;

use super::{Op, RegisterMachine, Transition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Expected { expected: &'static str, found: String },
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("undeclared thread `{0}`")]
    UndeclaredThread(String),
    #[error("undeclared variable `{0}`")]
    UndeclaredVar(String),
    #[error("undeclared register `{0}`")]
    UndeclaredReg(String),
    #[error("duplicate {what} `{name}`")]
    Duplicate { what: &'static str, name: String },
    #[error("duplicate state in `init`")]
    DuplicateInit,
    #[error("header `{0}` after the first transition")]
    LateHeader(String),
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,
    Colon,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Arrow => "`->`".into(),
            Tok::Colon => "`:`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Tokens of one line with their 1-based columns.
fn lex(line_no: usize, line: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            ':' => Tok::Colon,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Arrow
            }
            c if is_ident_start(c) => {
                let start = i;
                while i + 1 < chars.len() && is_ident_char(chars[i + 1]) {
                    i += 1;
                }
                Tok::Ident(chars[start..=i].iter().collect())
            }
            c => return Err(ParseError { line: line_no, column: col, kind: ParseErrorKind::UnexpectedChar(c) }),
        };
        toks.push((col, tok));
        i += 1;
    }
    Ok(toks)
}

struct Cursor<'a> {
    line: usize,
    toks: &'a [(usize, Tok)],
    pos: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, column, kind }
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end_col)
    }

    fn expected(&self, expected: &'static str) -> ParseError {
        let found = self.toks.get(self.pos).map(|t| t.1.describe()).unwrap_or_else(|| "end of line".into());
        self.err(self.column(), ParseErrorKind::Expected { expected, found })
    }

    fn ident(&mut self) -> Result<(usize, String), ParseError> {
        match self.toks.get(self.pos) {
            Some((col, Tok::Ident(s))) => {
                self.pos += 1;
                Ok((*col, s.clone()))
            }
            _ => Err(self.expected("identifier")),
        }
    }

    fn punct(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            Some((_, t)) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.expected(expected)),
        }
    }

    fn done(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            Err(self.expected("end of line"))
        } else {
            Ok(())
        }
    }
}

#[derive(Default)]
struct Tables {
    name: Option<String>,
    threads: Option<Vec<String>>,
    vars: Option<Vec<String>>,
    regs: Option<Vec<String>>,
    states: Vec<String>,
    initial: Option<usize>,
}

fn state_id(states: &mut Vec<String>, name: String) -> usize {
    match states.iter().position(|s| *s == name) {
        Some(i) => i,
        None => {
            states.push(name);
            states.len() - 1
        }
    }
}

fn lookup(
    cur: &Cursor<'_>,
    table: &Option<Vec<String>>,
    (col, name): (usize, String),
    undeclared: fn(String) -> ParseErrorKind,
) -> Result<usize, ParseError> {
    table.as_deref().unwrap_or(&[]).iter().position(|n| *n == name).ok_or_else(|| cur.err(col, undeclared(name)))
}

/// Parses the machine file format.
///
/// ```text
/// machine NAME
/// threads ID+
/// vars ID+
/// regs ID+
/// init ID
/// FROM -> TO : W(THREAD, VAR, REG)
/// FROM -> TO : R(THREAD, VAR, REG)
/// FROM -> TO : C(DSTREG, SRCREG)
/// ```
///
/// An optional `states ID+` header fixes the state order and may declare
/// states without transitions; other states are declared by use.
pub fn parse_machine(text: &[u8]) -> Result<RegisterMachine, ParseError> {
    let text = std::str::from_utf8(text).map_err(|e| {
        let prefix = &text[..e.valid_up_to()];
        let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
        let column = prefix.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
        ParseError { line, column, kind: ParseErrorKind::InvalidUtf8 }
    })?;

    let mut t = Tables::default();
    let mut transitions = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let toks = lex(line_no, raw)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor { line: line_no, toks: &toks, pos: 0, end_col: raw.chars().count() + 1 };
        let is_header = matches!(toks.get(1), None | Some((_, Tok::Ident(_))))
            && matches!(&toks[0].1, Tok::Ident(k) if matches!(k.as_str(),
                "machine" | "threads" | "vars" | "regs" | "init" | "states"));
        if is_header {
            let (kcol, keyword) = cur.ident()?;
            if !transitions.is_empty() {
                return Err(cur.err(kcol, ParseErrorKind::LateHeader(keyword)));
            }
            let mut ids = Vec::new();
            while cur.pos < toks.len() {
                ids.push(cur.ident()?);
            }
            if ids.is_empty() {
                return Err(cur.expected("identifier"));
            }
            match keyword.as_str() {
                "machine" | "init" => {
                    if ids.len() > 1 {
                        let (col, found) = &ids[1];
                        return Err(cur.err(
                            *col,
                            ParseErrorKind::Expected { expected: "end of line", found: format!("`{found}`") },
                        ));
                    }
                    let (col, id) = ids.pop().unwrap();
                    if keyword == "machine" {
                        if t.name.is_some() {
                            return Err(cur.err(kcol, ParseErrorKind::Duplicate { what: "header", name: keyword }));
                        }
                        t.name = Some(id);
                    } else {
                        if t.initial.is_some() {
                            return Err(cur.err(col, ParseErrorKind::DuplicateInit));
                        }
                        t.initial = Some(state_id(&mut t.states, id));
                    }
                }
                "states" => {
                    for (col, id) in ids {
                        if t.states.contains(&id) {
                            return Err(cur.err(col, ParseErrorKind::Duplicate { what: "state", name: id }));
                        }
                        t.states.push(id);
                    }
                }
                _ => {
                    let (slot, what) = match keyword.as_str() {
                        "threads" => (&mut t.threads, "thread"),
                        "vars" => (&mut t.vars, "variable"),
                        _ => (&mut t.regs, "register"),
                    };
                    if slot.is_some() {
                        return Err(cur.err(kcol, ParseErrorKind::Duplicate { what: "header", name: keyword }));
                    }
                    let mut list: Vec<String> = Vec::new();
                    for (col, id) in ids {
                        if list.contains(&id) {
                            return Err(cur.err(col, ParseErrorKind::Duplicate { what, name: id }));
                        }
                        list.push(id);
                    }
                    *slot = Some(list);
                }
            }
            continue;
        }

        let (_, from) = cur.ident()?;
        cur.punct(Tok::Arrow, "`->`")?;
        let (_, to) = cur.ident()?;
        cur.punct(Tok::Colon, "`:`")?;
        let (ocol, opname) = cur.ident()?;
        cur.punct(Tok::LParen, "`(`")?;
        let op = match opname.as_str() {
            "W" | "R" => {
                let th = cur.ident()?;
                cur.punct(Tok::Comma, "`,`")?;
                let var = cur.ident()?;
                cur.punct(Tok::Comma, "`,`")?;
                let reg = cur.ident()?;
                let thread = lookup(&cur, &t.threads, th, ParseErrorKind::UndeclaredThread)?;
                let var = lookup(&cur, &t.vars, var, ParseErrorKind::UndeclaredVar)?;
                let reg = lookup(&cur, &t.regs, reg, ParseErrorKind::UndeclaredReg)?;
                if opname == "W" {
                    Op::Write { thread, var, reg }
                } else {
                    Op::Read { thread, var, reg }
                }
            }
            "C" => {
                let dst = cur.ident()?;
                cur.punct(Tok::Comma, "`,`")?;
                let src = cur.ident()?;
                let dst = lookup(&cur, &t.regs, dst, ParseErrorKind::UndeclaredReg)?;
                let src = lookup(&cur, &t.regs, src, ParseErrorKind::UndeclaredReg)?;
                Op::Copy { dst, src }
            }
            _ => return Err(cur.err(ocol, ParseErrorKind::UnknownOp(opname))),
        };
        cur.punct(Tok::RParen, "`)`")?;
        cur.done()?;
        let from = state_id(&mut t.states, from);
        let to = state_id(&mut t.states, to);
        transitions.push(Transition { index: transitions.len(), from, to, op });
    }

    let missing = |what| ParseError { line: last_line.max(1), column: 1, kind: ParseErrorKind::MissingHeader(what) };
    let name = t.name.ok_or_else(|| missing("machine"))?;
    let initial = t.initial.ok_or_else(|| missing("init"))?;
    Ok(RegisterMachine {
        name,
        threads: t.threads.unwrap_or_default(),
        vars: t.vars.unwrap_or_default(),
        regs: t.regs.unwrap_or_default(),
        states: t.states,
        initial,
        transitions,
    })
}
