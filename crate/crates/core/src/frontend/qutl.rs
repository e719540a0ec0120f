//! QuTL formulas and `.qutl` invariant files.
//!
//! ```text
//! formula := imp
//! imp     := or ("->" imp)?              // right associative, a -> b == !a || b
//! or      := and ("||" and)*
//! and     := unary ("&&" unary)*
//! unary   := ("!" | "X" | "F" | "G") unary | atom
//! atom    := "true" | "false" | EV | "#" EV OP INT | "(" formula ")"
//! OP      := "<" | "<=" | "=" | "==" | ">=" | ">"
//! ```
//!
//! An invariant file holds one declaration per line,
//! `machine <name>: <formula>`; blank lines and `//` comments are skipped.

use super::lexer::{tokenize, Cursor, Tok};
use super::ParseDiagnostic;
use crate::model::{Alphabet, CqsModel, EventId, MachineIdx};
use crate::qutl::{Formula, RelOp};

enum Events<'a> {
    Closed(&'a Alphabet),
    Open(&'a mut Alphabet),
}

impl Events<'_> {
    fn resolve(&mut self, name: &str) -> Option<EventId> {
        match self {
            Events::Closed(a) => a.lookup(name),
            Events::Open(a) => Some(a.intern(name)),
        }
    }
}

struct Parser<'a> {
    cur: Cursor,
    events: Events<'a>,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser<'_> {
    fn imp(&mut self) -> PResult<Formula> {
        let lhs = self.or()?;
        if self.cur.accept_sym("->") {
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Formula> {
        let mut lhs = self.and()?;
        while self.cur.accept_sym("||") {
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while self.cur.accept_sym("&&") {
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.cur.accept_sym("!") {
            return Ok(Formula::not(self.unary()?));
        }
        for (kw, ctor) in [
            ("X", Formula::next as fn(Formula) -> Formula),
            ("F", Formula::eventually),
            ("G", Formula::globally),
        ] {
            if self.cur.accept_kw(kw) {
                return Ok(ctor(self.unary()?));
            }
        }
        self.atom()
    }

    fn event(&mut self) -> PResult<EventId> {
        let (name, line, col) = self.cur.expect_ident("event name")?;
        self.events
            .resolve(&name)
            .ok_or_else(|| ParseDiagnostic::error(format!("unknown event '{name}'"), line, col))
    }

    fn atom(&mut self) -> PResult<Formula> {
        if self.cur.accept_sym("(") {
            let f = self.imp()?;
            self.cur.expect_sym(")")?;
            return Ok(f);
        }
        if self.cur.accept_kw("true") {
            return Ok(Formula::True);
        }
        if self.cur.accept_kw("false") {
            return Ok(Formula::False);
        }
        if self.cur.accept_sym("#") {
            let e = self.event()?;
            let op = if self.cur.accept_sym("<=") {
                RelOp::Le
            } else if self.cur.accept_sym(">=") {
                RelOp::Ge
            } else if self.cur.accept_sym("<") {
                RelOp::Lt
            } else if self.cur.accept_sym(">") {
                RelOp::Gt
            } else if self.cur.accept_sym("=") || self.cur.accept_sym("==") {
                RelOp::Eq
            } else {
                return Err(self.cur.expected("relational operator"));
            };
            let c = match self.cur.peek().tok {
                Tok::Int(n) if n >= 0 && n <= u32::MAX as i64 => {
                    self.cur.bump();
                    n as u32
                }
                _ => return Err(self.cur.expected("natural number")),
            };
            return Ok(Formula::Rel(e, op, c));
        }
        if matches!(self.cur.peek().tok, Tok::Ident(_)) {
            return Ok(Formula::Head(self.event()?));
        }
        Err(self.cur.expected("formula"))
    }
}

fn parse_with(text: &str, events: Events<'_>) -> Result<Formula, Vec<ParseDiagnostic>> {
    let toks = tokenize(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        cur: Cursor::new(toks),
        events,
    };
    let f = p.imp().map_err(|d| vec![d])?;
    if !p.cur.at_eof() {
        return Err(vec![p.cur.expected("end of formula")]);
    }
    Ok(f)
}

/// Parses a formula whose events must already exist in `alphabet`.
pub fn parse_qutl(text: &str, alphabet: &Alphabet) -> Result<Formula, Vec<ParseDiagnostic>> {
    parse_with(text, Events::Closed(alphabet))
}

/// Parses a formula, adding unseen event names to `alphabet`.
pub fn parse_qutl_open(text: &str, alphabet: &mut Alphabet) -> Result<Formula, Vec<ParseDiagnostic>> {
    parse_with(text, Events::Open(alphabet))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantDecl {
    pub machine: MachineIdx,
    pub formula: Formula,
    pub line: usize,
}

fn parse_decl(text: &str, line: usize, model: &CqsModel) -> Result<InvariantDecl, ParseDiagnostic> {
    let shift = |mut d: ParseDiagnostic, col_off: usize| {
        d.line = line;
        d.column += col_off;
        d
    };
    let body = text.trim_start();
    let lead = text.len() - body.len();
    let Some(rest) = body.strip_prefix("machine") else {
        return Err(ParseDiagnostic::error("expected 'machine'", line, lead + 1));
    };
    let Some(colon) = rest.find(':') else {
        return Err(ParseDiagnostic::error("expected ':'", line, text.len() + 1));
    };
    let name = rest[..colon].trim();
    let machine = model.machine_index(name).ok_or_else(|| {
        ParseDiagnostic::error(format!("unknown machine '{name}'"), line, lead + 8)
    })?;
    let ftext = &rest[colon + 1..];
    let offset = lead + "machine".len() + colon + 1;
    let formula = parse_qutl(ftext, &model.alphabet)
        .map_err(|mut ds| shift(ds.remove(0), offset))?;
    Ok(InvariantDecl {
        machine,
        formula,
        line,
    })
}

/// Parses a whole `.qutl` file against a model.
pub fn parse_invariant_file(text: &str, model: &CqsModel) -> Result<Vec<InvariantDecl>, Vec<ParseDiagnostic>> {
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = match raw.find("//") {
            Some(c) => &raw[..c],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        match parse_decl(content, i + 1, model) {
            Ok(d) => out.push(d),
            Err(d) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}

/// Parses a single `machine <name>: <formula>` declaration, as given on the
/// command line.
pub fn parse_invariant_decl(text: &str, model: &CqsModel) -> Result<InvariantDecl, Vec<ParseDiagnostic>> {
    parse_decl(text, 1, model).map_err(|d| vec![d])
}
