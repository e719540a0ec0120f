//! `.cqs` machine descriptions.
//!
//! ```text
//! model   := events? machine+
//! events  := "events" NAME ("," NAME)* ";"
//! machine := "machine" NAME "{" reg* state+ "}"
//! reg     := "var" NAME ":" INT ".." INT ("=" INT)? ";"
//! state   := "state" NAME "{" entry? handler* assert* "}"
//! entry   := "entry" block
//! block   := "{" stmt* "}"
//! stmt    := "send" EV "to" NAME ";"
//!          | "set" REG "=" (INT | REG (("+" | "-") INT)?) ";"
//!          | "if" cond block ("else" (block | if-stmt))?
//!          | "goto" NAME ";"
//!          | "loop" INT block
//! handler := "on" EV ("goto" NAME ";"? | block) | "defer" EV ";" | "ignore" EV ";"
//! assert  := "assert" pred ";"
//! pred    := conj ("||" conj)* ; conj := unary ("&&" unary)*
//! unary   := "!" unary | "(" pred ")" | "true" | "false" | "empty"
//!          | "head" ("==" | "!=") EV | REG CMP INT
//! ```
//!
//! The first declared state is initial. Events are global; when an `events`
//! header is present every event used must be listed there.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::lexer::{tokenize, Cursor, Tok};
use super::{DslSource, ParseDiagnostic};
use crate::model::{
    Addr, Alphabet, CmpOp, CqsModel, Handler, Instr, MachineDef, Pred, RegExpr, Register, StateDef,
    StateIdx,
};

#[derive(Clone, Debug)]
struct Name {
    text: String,
    line: usize,
    col: usize,
}

#[derive(Clone, Debug)]
enum PredAst {
    True,
    False,
    Empty,
    Head(Name, bool),
    Reg(Name, CmpOp, i64),
    Not(Box<PredAst>),
    And(Box<PredAst>, Box<PredAst>),
    Or(Box<PredAst>, Box<PredAst>),
}

#[derive(Clone, Debug)]
enum ExprAst {
    Const(i64),
    Offset(Name, i64),
}

#[derive(Clone, Debug)]
enum Stmt {
    Send { event: Name, target: Name },
    Set { reg: Name, value: ExprAst },
    If { cond: PredAst, then: Vec<Stmt>, otherwise: Vec<Stmt> },
    Goto(Name),
    Loop(i64, Vec<Stmt>),
}

#[derive(Clone, Debug)]
enum HandlerAst {
    OnGoto(Name, Name),
    OnBlock(Name, Vec<Stmt>),
    Defer(Name),
    Ignore(Name),
}

impl HandlerAst {
    fn event(&self) -> &Name {
        match self {
            HandlerAst::OnGoto(e, _)
            | HandlerAst::OnBlock(e, _)
            | HandlerAst::Defer(e)
            | HandlerAst::Ignore(e) => e,
        }
    }
}

#[derive(Clone, Debug)]
struct StateAst {
    name: Name,
    entry: Vec<Stmt>,
    handlers: Vec<HandlerAst>,
    asserts: Vec<PredAst>,
}

#[derive(Clone, Debug)]
struct RegAst {
    name: Name,
    min: i64,
    max: i64,
    init: Option<i64>,
}

#[derive(Clone, Debug)]
struct MachineAst {
    name: Name,
    regs: Vec<RegAst>,
    states: Vec<StateAst>,
}

struct Parser {
    cur: Cursor,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn name(&mut self, what: &str) -> PResult<Name> {
        let (text, line, col) = self.cur.expect_ident(what)?;
        Ok(Name { text, line, col })
    }

    fn model(&mut self) -> PResult<(Option<Vec<Name>>, Vec<MachineAst>)> {
        let mut events = None;
        if self.cur.accept_kw("events") {
            let mut list = vec![self.name("event name")?];
            while self.cur.accept_sym(",") {
                list.push(self.name("event name")?);
            }
            self.cur.expect_sym(";")?;
            events = Some(list);
        }
        let mut machines = Vec::new();
        loop {
            if self.cur.at_eof() && !machines.is_empty() {
                break;
            }
            if !self.cur.is_kw("machine") {
                return Err(self.cur.error_here("expected 'machine'"));
            }
            machines.push(self.machine()?);
        }
        Ok((events, machines))
    }

    fn machine(&mut self) -> PResult<MachineAst> {
        self.cur.expect_kw("machine")?;
        let name = self.name("machine name")?;
        self.cur.expect_sym("{")?;
        let mut regs = Vec::new();
        while self.cur.accept_kw("var") {
            let rname = self.name("register name")?;
            self.cur.expect_sym(":")?;
            let min = self.cur.expect_int()?;
            self.cur.expect_sym("..")?;
            let max = self.cur.expect_int()?;
            let init = if self.cur.accept_sym("=") {
                Some(self.cur.expect_int()?)
            } else {
                None
            };
            self.cur.expect_sym(";")?;
            regs.push(RegAst {
                name: rname,
                min,
                max,
                init,
            });
        }
        let mut states = Vec::new();
        while self.cur.is_kw("state") {
            states.push(self.state()?);
        }
        if states.is_empty() {
            return Err(self.cur.expected("'state'"));
        }
        self.cur.expect_sym("}")?;
        Ok(MachineAst { name, regs, states })
    }

    fn state(&mut self) -> PResult<StateAst> {
        self.cur.expect_kw("state")?;
        let name = self.name("state name")?;
        self.cur.expect_sym("{")?;
        let entry = if self.cur.accept_kw("entry") {
            self.block()?
        } else {
            Vec::new()
        };
        let mut handlers = Vec::new();
        let mut asserts = Vec::new();
        loop {
            if self.cur.accept_kw("on") {
                let ev = self.name("event name")?;
                if self.cur.accept_kw("goto") {
                    let target = self.name("state name")?;
                    self.cur.accept_sym(";");
                    handlers.push(HandlerAst::OnGoto(ev, target));
                } else if self.cur.is_sym("{") {
                    handlers.push(HandlerAst::OnBlock(ev, self.block()?));
                } else {
                    return Err(self.cur.expected("'goto' or '{'"));
                }
            } else if self.cur.accept_kw("defer") {
                let ev = self.name("event name")?;
                self.cur.expect_sym(";")?;
                handlers.push(HandlerAst::Defer(ev));
            } else if self.cur.accept_kw("ignore") {
                let ev = self.name("event name")?;
                self.cur.expect_sym(";")?;
                handlers.push(HandlerAst::Ignore(ev));
            } else if self.cur.accept_kw("assert") {
                asserts.push(self.pred()?);
                self.cur.expect_sym(";")?;
            } else {
                break;
            }
        }
        self.cur.expect_sym("}")?;
        Ok(StateAst {
            name,
            entry,
            handlers,
            asserts,
        })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.cur.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.cur.accept_sym("}") {
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        if self.cur.accept_kw("send") {
            let event = self.name("event name")?;
            self.cur.expect_kw("to")?;
            let target = self.name("machine name")?;
            self.cur.expect_sym(";")?;
            return Ok(Stmt::Send { event, target });
        }
        if self.cur.accept_kw("set") {
            let reg = self.name("register name")?;
            self.cur.expect_sym("=")?;
            let value = match self.cur.peek().tok {
                Tok::Int(_) => ExprAst::Const(self.cur.expect_int()?),
                Tok::Sym("-") => ExprAst::Const(self.cur.expect_int()?),
                _ => {
                    let src = self.name("register or integer")?;
                    let off = if self.cur.accept_sym("+") {
                        self.cur.expect_int()?
                    } else if self.cur.accept_sym("-") {
                        -self.cur.expect_int()?
                    } else {
                        0
                    };
                    ExprAst::Offset(src, off)
                }
            };
            self.cur.expect_sym(";")?;
            return Ok(Stmt::Set { reg, value });
        }
        if self.cur.is_kw("if") {
            return self.if_stmt();
        }
        if self.cur.accept_kw("goto") {
            let target = self.name("state name")?;
            self.cur.expect_sym(";")?;
            return Ok(Stmt::Goto(target));
        }
        if self.cur.accept_kw("loop") {
            let n = self.cur.expect_int()?;
            if n < 0 {
                return Err(self.cur.error_here("loop bound must be non-negative"));
            }
            let body = self.block()?;
            return Ok(Stmt::Loop(n, body));
        }
        Err(self.cur.expected("statement"))
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        self.cur.expect_kw("if")?;
        let cond = self.pred()?;
        let then = self.block()?;
        let otherwise = if self.cur.accept_kw("else") {
            if self.cur.is_kw("if") {
                vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt::If {
            cond,
            then,
            otherwise,
        })
    }

    fn pred(&mut self) -> PResult<PredAst> {
        let mut lhs = self.conj()?;
        while self.cur.accept_sym("||") {
            lhs = PredAst::Or(Box::new(lhs), Box::new(self.conj()?));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<PredAst> {
        let mut lhs = self.unary()?;
        while self.cur.accept_sym("&&") {
            lhs = PredAst::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<PredAst> {
        if self.cur.accept_sym("!") {
            return Ok(PredAst::Not(Box::new(self.unary()?)));
        }
        if self.cur.accept_sym("(") {
            let p = self.pred()?;
            self.cur.expect_sym(")")?;
            return Ok(p);
        }
        if self.cur.accept_kw("true") {
            return Ok(PredAst::True);
        }
        if self.cur.accept_kw("false") {
            return Ok(PredAst::False);
        }
        if self.cur.accept_kw("empty") {
            return Ok(PredAst::Empty);
        }
        if self.cur.accept_kw("head") {
            let positive = if self.cur.accept_sym("==") {
                true
            } else if self.cur.accept_sym("!=") {
                false
            } else {
                return Err(self.cur.expected("'==' or '!='"));
            };
            return Ok(PredAst::Head(self.name("event name")?, positive));
        }
        let reg = self.name("condition")?;
        let op = self.cmp()?;
        let c = self.cur.expect_int()?;
        Ok(PredAst::Reg(reg, op, c))
    }

    fn cmp(&mut self) -> PResult<CmpOp> {
        for (s, op) in [
            ("==", CmpOp::Eq),
            ("!=", CmpOp::Ne),
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
        ] {
            if self.cur.accept_sym(s) {
                return Ok(op);
            }
        }
        Err(self.cur.expected("comparison operator"))
    }
}

/// Where control continues; resolved to an address after all states exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Label {
    Addr(usize),
    Entry(StateIdx),
    Wait(StateIdx),
}

#[derive(Clone, Copy, Debug)]
enum HandlerLabel {
    On(Label),
    Ignore,
    Defer,
}

#[derive(Clone, Debug)]
enum PInstr {
    Send { event: crate::model::EventId, target: usize, next: Label },
    Set { reg: usize, value: RegExpr, next: Label },
    Branch { cond: Pred, then: Label, otherwise: Label },
    Wait(StateIdx),
}

struct Ctx<'a> {
    alphabet: &'a mut Alphabet,
    closed_events: bool,
    machines: &'a HashMap<String, usize>,
    diags: &'a mut Vec<ParseDiagnostic>,
}

impl Ctx<'_> {
    fn err(&mut self, n: &Name, msg: String) {
        self.diags.push(ParseDiagnostic::error(msg, n.line, n.col));
    }

    fn event(&mut self, n: &Name) -> crate::model::EventId {
        if let Some(e) = self.alphabet.lookup(&n.text) {
            return e;
        }
        if self.closed_events {
            self.err(n, format!("unknown event '{}'", n.text));
        }
        self.alphabet.intern(&n.text)
    }
}

struct MachineCompiler<'a, 'b> {
    ctx: &'a mut Ctx<'b>,
    states: HashMap<String, StateIdx>,
    regs: HashMap<String, usize>,
    code: Vec<PInstr>,
    owner: Vec<StateIdx>,
    current: StateIdx,
}

impl MachineCompiler<'_, '_> {
    fn push(&mut self, i: PInstr) -> Label {
        self.code.push(i);
        self.owner.push(self.current);
        Label::Addr(self.code.len() - 1)
    }

    fn state(&mut self, n: &Name) -> StateIdx {
        match self.states.get(&n.text) {
            Some(s) => *s,
            None => {
                self.ctx.err(n, format!("unknown state '{}'", n.text));
                0
            }
        }
    }

    fn reg(&mut self, n: &Name) -> usize {
        match self.regs.get(&n.text) {
            Some(r) => *r,
            None => {
                self.ctx.err(n, format!("unknown register '{}'", n.text));
                0
            }
        }
    }

    fn pred(&mut self, p: &PredAst, allow_queue: bool) -> Pred {
        match p {
            PredAst::True => Pred::True,
            PredAst::False => Pred::False,
            PredAst::Empty | PredAst::Head(..) if !allow_queue => {
                let n = match p {
                    PredAst::Head(n, _) => n.clone(),
                    _ => Name {
                        text: "empty".into(),
                        line: 0,
                        col: 0,
                    },
                };
                self.ctx
                    .err(&n, "branch conditions may only read registers".to_string());
                Pred::False
            }
            PredAst::Empty => Pred::Empty,
            PredAst::Head(e, positive) => {
                let id = self.ctx.event(e);
                if *positive {
                    Pred::Head(id)
                } else {
                    Pred::Not(Box::new(Pred::Head(id)))
                }
            }
            PredAst::Reg(r, op, c) => Pred::Reg(self.reg(r), *op, *c),
            PredAst::Not(a) => Pred::Not(Box::new(self.pred(a, allow_queue))),
            PredAst::And(a, b) => Pred::And(
                Box::new(self.pred(a, allow_queue)),
                Box::new(self.pred(b, allow_queue)),
            ),
            PredAst::Or(a, b) => Pred::Or(
                Box::new(self.pred(a, allow_queue)),
                Box::new(self.pred(b, allow_queue)),
            ),
        }
    }

    fn seq(&mut self, stmts: &[Stmt], cont: Label) -> Label {
        match stmts.split_first() {
            None => cont,
            Some((first, rest)) => {
                let rest_label = self.seq(rest, cont);
                self.stmt(first, rest_label)
            }
        }
    }

    fn stmt(&mut self, s: &Stmt, cont: Label) -> Label {
        match s {
            Stmt::Send { event, target } => {
                let event = self.ctx.event(event);
                let target = match self.ctx.machines.get(&target.text) {
                    Some(m) => *m,
                    None => {
                        self.ctx
                            .err(target, format!("unknown machine '{}'", target.text));
                        0
                    }
                };
                self.push(PInstr::Send {
                    event,
                    target,
                    next: cont,
                })
            }
            Stmt::Set { reg, value } => {
                let reg = self.reg(reg);
                let value = match value {
                    ExprAst::Const(c) => RegExpr::Const(*c),
                    ExprAst::Offset(r, d) => RegExpr::Offset(self.reg(r), *d),
                };
                self.push(PInstr::Set {
                    reg,
                    value,
                    next: cont,
                })
            }
            Stmt::If {
                cond,
                then,
                otherwise,
            } => {
                let cond = self.pred(cond, false);
                let t = self.seq(then, cont);
                let e = self.seq(otherwise, cont);
                self.push(PInstr::Branch {
                    cond,
                    then: t,
                    otherwise: e,
                })
            }
            Stmt::Goto(target) => Label::Entry(self.state(target)),
            Stmt::Loop(n, body) => {
                let mut c = cont;
                for _ in 0..*n {
                    c = self.seq(body, c);
                }
                c
            }
        }
    }
}

fn compile_machine(ast: &MachineAst, ctx: &mut Ctx<'_>) -> Option<MachineDef> {
    let errors_before = ctx.diags.len();
    let mut states = HashMap::new();
    for (i, s) in ast.states.iter().enumerate() {
        if states.insert(s.name.text.clone(), i).is_some() {
            ctx.err(&s.name, format!("duplicate state '{}'", s.name.text));
        }
    }
    let mut regs = HashMap::new();
    let mut registers = Vec::new();
    for (i, r) in ast.regs.iter().enumerate() {
        if regs.insert(r.name.text.clone(), i).is_some() {
            ctx.err(&r.name, format!("duplicate register '{}'", r.name.text));
        }
        let init = r.init.unwrap_or(r.min);
        if r.min > r.max || init < r.min || init > r.max {
            ctx.err(&r.name, format!("invalid range for register '{}'", r.name.text));
        }
        registers.push(Register {
            name: r.name.text.clone(),
            min: r.min,
            max: r.max,
            init,
        });
    }

    let mut mc = MachineCompiler {
        ctx,
        states,
        regs,
        code: Vec::new(),
        owner: Vec::new(),
        current: 0,
    };

    let mut waits = Vec::new();
    let mut entries = Vec::new();
    let mut handler_labels: Vec<BTreeMap<crate::model::EventId, HandlerLabel>> = Vec::new();
    let mut asserts = Vec::new();
    for (si, s) in ast.states.iter().enumerate() {
        mc.current = si;
        let wait = mc.push(PInstr::Wait(si));
        waits.push(wait);
        entries.push(mc.seq(&s.entry, Label::Wait(si)));
        let mut hs = BTreeMap::new();
        for h in &s.handlers {
            let e = mc.ctx.event(h.event());
            let label = match h {
                HandlerAst::OnGoto(_, target) => HandlerLabel::On(Label::Entry(mc.state(target))),
                HandlerAst::OnBlock(_, body) => HandlerLabel::On(mc.seq(body, Label::Wait(si))),
                HandlerAst::Defer(_) => HandlerLabel::Defer,
                HandlerAst::Ignore(_) => HandlerLabel::Ignore,
            };
            if hs.insert(e, label).is_some() {
                let ev = h.event().clone();
                mc.ctx
                    .err(&ev, format!("duplicate handler for '{}' in state '{}'", ev.text, s.name.text));
            }
        }
        handler_labels.push(hs);
        asserts.push(s.asserts.iter().map(|a| mc.pred(a, true)).collect::<Vec<_>>());
    }

    // Resolve labels to addresses; a cycle means an entry that loops without
    // ever reaching an action.
    let resolve = |start: Label, diags: &mut Vec<ParseDiagnostic>, who: &Name| -> usize {
        let mut seen = HashSet::new();
        let mut l = start;
        loop {
            if !seen.insert(l) {
                diags.push(ParseDiagnostic::error(
                    format!("state entry in machine '{}' loops without performing an action", who.text),
                    who.line,
                    who.col,
                ));
                return 0;
            }
            match l {
                Label::Addr(a) => return a,
                Label::Wait(s) => l = waits[s],
                Label::Entry(s) => l = entries[s],
            }
        }
    };
    let diags = &mut *mc.ctx.diags;
    let mk = |a: usize| a as Addr;
    let mut code = Vec::with_capacity(mc.code.len());
    for pi in &mc.code {
        code.push(match pi {
            PInstr::Send {
                event,
                target,
                next,
            } => Instr::Send {
                event: *event,
                target: *target,
                next: mk(resolve(*next, diags, &ast.name)),
            },
            PInstr::Set { reg, value, next } => Instr::Set {
                reg: *reg,
                value: value.clone(),
                next: mk(resolve(*next, diags, &ast.name)),
            },
            PInstr::Branch {
                cond,
                then,
                otherwise,
            } => Instr::Branch {
                cond: cond.clone(),
                then: mk(resolve(*then, diags, &ast.name)),
                otherwise: mk(resolve(*otherwise, diags, &ast.name)),
            },
            PInstr::Wait(s) => Instr::Wait(*s),
        });
    }
    let mut state_defs = Vec::new();
    for (si, s) in ast.states.iter().enumerate() {
        let handlers = handler_labels[si]
            .iter()
            .map(|(e, l)| {
                let h = match l {
                    HandlerLabel::Defer => Handler::Defer,
                    HandlerLabel::Ignore => Handler::Ignore,
                    HandlerLabel::On(l) => Handler::On(mk(resolve(*l, diags, &ast.name))),
                };
                (*e, h)
            })
            .collect();
        state_defs.push(StateDef {
            name: s.name.text.clone(),
            entry: mk(resolve(entries[si], diags, &ast.name)),
            wait: mk(resolve(waits[si], diags, &ast.name)),
            handlers,
            assertions: asserts[si].clone(),
        });
    }
    // Branch-only cycles (through conditions) would make settling diverge.
    for start in 0..code.len() {
        let mut seen = HashSet::new();
        let mut stack = vec![start];
        while let Some(a) = stack.pop() {
            if let Instr::Branch { then, otherwise, .. } = &code[a] {
                for n in [*then as usize, *otherwise as usize] {
                    if n == start {
                        diags.push(ParseDiagnostic::error(
                            format!("machine '{}' has a branch cycle without an action", ast.name.text),
                            ast.name.line,
                            ast.name.col,
                        ));
                        return None;
                    }
                    if seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
        }
    }
    if code.len() > Addr::MAX as usize {
        diags.push(ParseDiagnostic::error(
            format!("machine '{}' is too large", ast.name.text),
            ast.name.line,
            ast.name.col,
        ));
    }
    if diags.len() > errors_before {
        return None;
    }
    Some(MachineDef {
        name: ast.name.text.clone(),
        registers,
        states: state_defs,
        initial: 0,
        code,
        owner: mc.owner,
    })
}

/// Parses and validates a machine description.
pub fn parse_model(src: &DslSource) -> Result<CqsModel, Vec<ParseDiagnostic>> {
    let toks = tokenize(&src.text).map_err(|d| vec![d])?;
    let mut p = Parser {
        cur: Cursor::new(toks),
    };
    let (events, asts) = p.model().map_err(|d| vec![d])?;

    let mut diags = Vec::new();
    let mut alphabet = Alphabet::new();
    if let Some(evs) = &events {
        for e in evs {
            if alphabet.lookup(&e.text).is_some() {
                diags.push(ParseDiagnostic::error(
                    format!("duplicate event '{}'", e.text),
                    e.line,
                    e.col,
                ));
            }
            alphabet.intern(&e.text);
        }
    }
    let mut machine_ix = HashMap::new();
    for (i, m) in asts.iter().enumerate() {
        if machine_ix.insert(m.name.text.clone(), i).is_some() {
            diags.push(ParseDiagnostic::error(
                format!("duplicate machine '{}'", m.name.text),
                m.name.line,
                m.name.col,
            ));
        }
    }
    let mut machines = Vec::new();
    {
        let mut ctx = Ctx {
            alphabet: &mut alphabet,
            closed_events: events.is_some(),
            machines: &machine_ix,
            diags: &mut diags,
        };
        for m in &asts {
            if let Some(def) = compile_machine(m, &mut ctx) {
                machines.push(def);
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(CqsModel { machines, alphabet })
}
