//! Communicating queue systems: machines, global states and the concrete
//! interleaving semantics with blocking enqueues.
//!
//! A machine's control state is a location in its compiled instruction
//! stream together with its register valuation. Locations always point at an
//! instruction that performs an observable step (`Send`, `Set`) or at the
//! `Wait` point of a declared state, where the machine dequeues.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// A symbol of the shared queue alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EventId(pub u8);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Symbol table for the queue alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut a = Self::new();
        for n in names {
            a.intern(&n.into());
        }
        a
    }

    /// Returns the id for `name`, adding it when absent.
    pub fn intern(&mut self, name: &str) -> EventId {
        if let Some(id) = self.lookup(name) {
            return id;
        }
        assert!(self.names.len() < u8::MAX as usize, "alphabet too large");
        self.names.push(name.to_string());
        EventId((self.names.len() - 1) as u8)
    }

    pub fn lookup(&self, name: &str) -> Option<EventId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| EventId(i as u8))
    }

    pub fn name(&self, id: EventId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.names.len()).map(|i| EventId(i as u8))
    }

    /// Renders a word as `a.b.c`, or `ε` when empty.
    pub fn render_word(&self, word: &[EventId]) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        word.iter()
            .map(|e| self.name(*e))
            .collect::<Vec<_>>()
            .join(".")
    }
}

pub type MachineIdx = usize;
pub type StateIdx = usize;
pub type RegIdx = usize;
pub type Addr = u16;

/// Label of a single CQS transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionLabel {
    Dequeue { event: EventId },
    Local,
    Send { event: EventId, target: MachineIdx },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Handler {
    /// Dequeue and continue at the given address.
    On(Addr),
    Ignore,
    Defer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn eval(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// Predicate over a machine's registers and queue head.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pred {
    True,
    False,
    /// Queue nonempty and its head is the event.
    Head(EventId),
    Empty,
    Reg(RegIdx, CmpOp, i64),
    Not(Box<Pred>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
}

impl Pred {
    pub fn eval(&self, regs: &[i64], head: Option<EventId>) -> bool {
        match self {
            Pred::True => true,
            Pred::False => false,
            Pred::Head(e) => head == Some(*e),
            Pred::Empty => head.is_none(),
            Pred::Reg(r, op, c) => op.eval(regs[*r], *c),
            Pred::Not(p) => !p.eval(regs, head),
            Pred::And(a, b) => a.eval(regs, head) && b.eval(regs, head),
            Pred::Or(a, b) => a.eval(regs, head) || b.eval(regs, head),
        }
    }

    pub fn mentions_queue(&self) -> bool {
        match self {
            Pred::Head(_) | Pred::Empty => true,
            Pred::True | Pred::False | Pred::Reg(..) => false,
            Pred::Not(p) => p.mentions_queue(),
            Pred::And(a, b) | Pred::Or(a, b) => a.mentions_queue() || b.mentions_queue(),
        }
    }
}

/// Right-hand side of a register assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegExpr {
    Const(i64),
    /// `reg + offset`
    Offset(RegIdx, i64),
}

impl RegExpr {
    pub fn eval(&self, regs: &[i64]) -> i64 {
        match self {
            RegExpr::Const(c) => *c,
            RegExpr::Offset(r, d) => regs[*r] + d,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instr {
    Send {
        event: EventId,
        target: MachineIdx,
        next: Addr,
    },
    Set {
        reg: RegIdx,
        value: RegExpr,
        next: Addr,
    },
    Branch {
        cond: Pred,
        then: Addr,
        otherwise: Addr,
    },
    Jump(Addr),
    /// Entry finished; the machine dequeues its next event here.
    Wait(StateIdx),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub min: i64,
    pub max: i64,
    pub init: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateDef {
    pub name: String,
    pub entry: Addr,
    pub wait: Addr,
    pub handlers: BTreeMap<EventId, Handler>,
    pub assertions: Vec<Pred>,
}

impl StateDef {
    pub fn handler(&self, e: EventId) -> Option<Handler> {
        self.handlers.get(&e).copied()
    }

    pub fn is_deferred(&self, e: EventId) -> bool {
        matches!(self.handler(e), Some(Handler::Defer))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineDef {
    pub name: String,
    pub registers: Vec<Register>,
    pub states: Vec<StateDef>,
    pub initial: StateIdx,
    pub code: Vec<Instr>,
    /// Declared state owning each instruction.
    pub owner: Vec<StateIdx>,
}

impl MachineDef {
    pub fn state_index(&self, name: &str) -> Option<StateIdx> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn initial_local(&self) -> LocalState {
        let regs: Vec<i64> = self.registers.iter().map(|r| r.init).collect();
        let loc = self.settle(self.states[self.initial].entry, &regs);
        LocalState { loc, regs }
    }

    /// Follows branches and jumps from `addr` to the next action or wait point.
    pub fn settle(&self, mut addr: Addr, regs: &[i64]) -> Addr {
        // The compiler rejects branch/jump cycles, so this terminates.
        loop {
            match &self.code[addr as usize] {
                Instr::Jump(t) => addr = *t,
                Instr::Branch {
                    cond,
                    then,
                    otherwise,
                } => addr = if cond.eval(regs, None) { *then } else { *otherwise },
                _ => return addr,
            }
        }
    }

    /// Declared state currently occupied by a machine at `loc`.
    pub fn state_of(&self, loc: Addr) -> StateIdx {
        self.owner[loc as usize]
    }

    /// The declared state if the machine is waiting to dequeue.
    pub fn waiting_state(&self, loc: Addr) -> Option<StateIdx> {
        match self.code[loc as usize] {
            Instr::Wait(s) => Some(s),
            _ => None,
        }
    }

    /// Human-readable control location, e.g. `Init` or `Init@3`.
    pub fn location_name(&self, local: &LocalState) -> String {
        let s = &self.states[self.state_of(local.loc)];
        let mut out = if self.waiting_state(local.loc).is_some() {
            s.name.clone()
        } else {
            format!("{}@{}", s.name, local.loc)
        };
        if !self.registers.is_empty() {
            let regs: Vec<String> = self
                .registers
                .iter()
                .zip(&local.regs)
                .map(|(r, v)| format!("{}={}", r.name, v))
                .collect();
            out.push_str(&format!("[{}]", regs.join(",")));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CqsModel {
    pub machines: Vec<MachineDef>,
    pub alphabet: Alphabet,
}

impl CqsModel {
    pub fn machine_index(&self, name: &str) -> Option<MachineIdx> {
        self.machines.iter().position(|m| m.name == name)
    }

    pub fn len(&self) -> usize {
        self.machines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.machines.is_empty()
    }
}

/// FIFO contents of one machine's input queue; index 0 is the head.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ConcreteQueue(pub Vec<EventId>);

impl ConcreteQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn head(&self) -> Option<EventId> {
        self.0.first().copied()
    }

    pub fn get(&self, i: usize) -> Option<EventId> {
        self.0.get(i).copied()
    }

    /// The queue with its first `i` events dropped.
    pub fn from(&self, i: usize) -> &[EventId] {
        &self.0[i.min(self.0.len())..]
    }

    pub fn events(&self) -> &[EventId] {
        &self.0
    }
}

impl From<Vec<EventId>> for ConcreteQueue {
    fn from(v: Vec<EventId>) -> Self {
        ConcreteQueue(v)
    }
}

/// Control part of a machine state: location plus registers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalState {
    pub loc: Addr,
    pub regs: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MachineState {
    pub local: LocalState,
    pub queue: ConcreteQueue,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalState(pub Vec<MachineState>);

impl GlobalState {
    /// Canonical byte encoding: machines in order, each as location,
    /// registers in declaration order, then the length-prefixed queue.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for m in &self.0 {
            out.extend_from_slice(&m.local.loc.to_le_bytes());
            for r in &m.local.regs {
                out.extend_from_slice(&r.to_le_bytes());
            }
            out.extend_from_slice(&(m.queue.len() as u32).to_le_bytes());
            out.extend(m.queue.0.iter().map(|e| e.0));
        }
        out
    }

    pub fn max_queue_len(&self) -> usize {
        self.0.iter().map(|m| m.queue.len()).max().unwrap_or(0)
    }

    pub fn render(&self, model: &CqsModel) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .zip(&model.machines)
            .map(|(ms, def)| {
                format!(
                    "{}:{}|{}",
                    def.name,
                    def.location_name(&ms.local),
                    model.alphabet.render_word(ms.queue.events())
                )
            })
            .collect();
        format!("⟨{}⟩", parts.join(", "))
    }
}

/// Queue capacity used for exploration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueueBound {
    Bounded(usize),
    Unbounded,
}

impl QueueBound {
    pub fn admits(self, len: usize) -> bool {
        match self {
            QueueBound::Bounded(k) => len < k,
            QueueBound::Unbounded => true,
        }
    }
}

/// A safety error observed in a state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Assertion {
        machine: MachineIdx,
        state: StateIdx,
        index: usize,
    },
    /// The event selected for dequeue has no handler.
    Responsiveness { machine: MachineIdx, event: EventId },
    RegisterRange {
        machine: MachineIdx,
        reg: RegIdx,
        value: i64,
    },
}

impl Violation {
    pub fn machine(&self) -> MachineIdx {
        match self {
            Violation::Assertion { machine, .. }
            | Violation::Responsiveness { machine, .. }
            | Violation::RegisterRange { machine, .. } => *machine,
        }
    }

    pub fn describe(&self, model: &CqsModel) -> String {
        match self {
            Violation::Assertion {
                machine,
                state,
                index,
            } => {
                let m = &model.machines[*machine];
                format!(
                    "assertion #{} of {}.{} violated",
                    index, m.name, m.states[*state].name
                )
            }
            Violation::Responsiveness { machine, event } => format!(
                "responsiveness violation: {} has no handler for {}",
                model.machines[*machine].name,
                model.alphabet.name(*event)
            ),
            Violation::RegisterRange {
                machine,
                reg,
                value,
            } => {
                let m = &model.machines[*machine];
                format!(
                    "register {}.{} out of range (value {})",
                    m.name, m.registers[*reg].name, value
                )
            }
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::Dequeue { event } => write!(f, "dq({})", event.0),
            ActionLabel::Local => write!(f, "loc"),
            ActionLabel::Send { event, target } => write!(f, "{}!{}", event.0, target),
        }
    }
}

impl ActionLabel {
    pub fn render(&self, model: &CqsModel) -> String {
        match self {
            ActionLabel::Dequeue { event } => format!("dq {}", model.alphabet.name(*event)),
            ActionLabel::Local => "loc".to_string(),
            ActionLabel::Send { event, target } => format!(
                "send {} to {}",
                model.alphabet.name(*event),
                model.machines[*target].name
            ),
        }
    }
}

/// One enabled transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub machine: MachineIdx,
    pub label: ActionLabel,
    pub successor: GlobalState,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Successors {
    pub steps: Vec<Step>,
    /// Safety errors raised while computing the steps.
    pub violations: Vec<Violation>,
}

pub fn initial_state(model: &CqsModel) -> GlobalState {
    GlobalState(
        model
            .machines
            .iter()
            .map(|m| MachineState {
                local: m.initial_local(),
                queue: ConcreteQueue::new(),
            })
            .collect(),
    )
}

/// Index of the event a machine waiting in `state` would dequeue: the first
/// event that is not deferred.
pub fn select_dequeue(state: &StateDef, queue: &[EventId]) -> Option<usize> {
    queue.iter().position(|e| !state.is_deferred(*e))
}

/// Outcome of a dequeue from a wait point, shared by the concrete and the
/// abstract semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DequeueEffect {
    /// Remove the event and move to the given local state.
    Consume(LocalState),
    /// No handler: responsiveness violation.
    Unhandled,
}

pub fn dequeue_effect(def: &MachineDef, local: &LocalState, state: StateIdx, e: EventId) -> DequeueEffect {
    match def.states[state].handler(e) {
        Some(Handler::On(addr)) => DequeueEffect::Consume(LocalState {
            loc: def.settle(addr, &local.regs),
            regs: local.regs.clone(),
        }),
        Some(Handler::Ignore) => DequeueEffect::Consume(local.clone()),
        // A selected event is never deferred.
        Some(Handler::Defer) | None => DequeueEffect::Unhandled,
    }
}

/// The strict-interleaving successors of `g`, in machine order.
pub fn enabled_steps(model: &CqsModel, g: &GlobalState, bound: QueueBound) -> Successors {
    let mut out = Successors::default();
    for (i, def) in model.machines.iter().enumerate() {
        let ms = &g.0[i];
        let local = &ms.local;
        match &def.code[local.loc as usize] {
            Instr::Send {
                event,
                target,
                next,
            } => {
                if !bound.admits(g.0[*target].queue.len()) {
                    continue;
                }
                let mut succ = g.clone();
                succ.0[i].local.loc = def.settle(*next, &local.regs);
                succ.0[*target].queue.0.push(*event);
                out.steps.push(Step {
                    machine: i,
                    label: ActionLabel::Send {
                        event: *event,
                        target: *target,
                    },
                    successor: succ,
                });
            }
            Instr::Set { reg, value, next } => {
                let v = value.eval(&local.regs);
                let r = &def.registers[*reg];
                if v < r.min || v > r.max {
                    out.violations.push(Violation::RegisterRange {
                        machine: i,
                        reg: *reg,
                        value: v,
                    });
                    continue;
                }
                let mut succ = g.clone();
                let slot = &mut succ.0[i].local;
                slot.regs[*reg] = v;
                slot.loc = def.settle(*next, &slot.regs);
                out.steps.push(Step {
                    machine: i,
                    label: ActionLabel::Local,
                    successor: succ,
                });
            }
            Instr::Wait(s) => {
                let state = &def.states[*s];
                let Some(j) = select_dequeue(state, ms.queue.events()) else {
                    continue;
                };
                let e = ms.queue.0[j];
                match dequeue_effect(def, local, *s, e) {
                    DequeueEffect::Consume(next_local) => {
                        let mut succ = g.clone();
                        succ.0[i].local = next_local;
                        succ.0[i].queue.0.remove(j);
                        out.steps.push(Step {
                            machine: i,
                            label: ActionLabel::Dequeue { event: e },
                            successor: succ,
                        });
                    }
                    DequeueEffect::Unhandled => out.violations.push(Violation::Responsiveness {
                        machine: i,
                        event: e,
                    }),
                }
            }
            Instr::Branch { .. } | Instr::Jump(_) => {
                unreachable!("locations are settled")
            }
        }
    }
    out
}

/// Evaluates every machine's assertions for the state it currently occupies.
pub fn check_local_assertion(model: &CqsModel, g: &GlobalState) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, def) in model.machines.iter().enumerate() {
        let ms = &g.0[i];
        let s = def.state_of(ms.local.loc);
        for (idx, p) in def.states[s].assertions.iter().enumerate() {
            if !p.eval(&ms.local.regs, ms.queue.head()) {
                out.push(Violation::Assertion {
                    machine: i,
                    state: s,
                    index: idx,
                });
            }
        }
    }
    out
}

/// All safety errors of `g`: assertions plus errors raised by its steps.
pub fn violations(model: &CqsModel, g: &GlobalState) -> Vec<Violation> {
    let mut v = check_local_assertion(model, g);
    v.extend(enabled_steps(model, g, QueueBound::Unbounded).violations);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_model_str;

    const PAIR: &str = r#"
        machine A {
            state A0 { entry { send e to B; } }
        }
        machine B {
            state B0 { on e goto B1; }
            state B1 { }
        }
    "#;

    fn q(v: &[u8]) -> ConcreteQueue {
        ConcreteQueue(v.iter().map(|&e| EventId(e)).collect())
    }

    #[test]
    fn initial_state_has_empty_queues() {
        let m = parse_model_str(PAIR).unwrap();
        let g = initial_state(&m);
        assert_eq!(g.0.len(), 2);
        assert!(g.0.iter().all(|ms| ms.queue.is_empty()));
        assert_eq!(m.machines[1].state_of(g.0[1].local.loc), 0);
    }

    #[test]
    fn single_machine_initial() {
        let m = parse_model_str("machine M { state Init { } }").unwrap();
        let g = initial_state(&m);
        assert_eq!(g.render(&m), "⟨M:Init|ε⟩");
    }

    #[test]
    fn send_is_enabled_below_bound_and_blocks_at_bound() {
        let m = parse_model_str(PAIR).unwrap();
        let g = initial_state(&m);
        let s = enabled_steps(&m, &g, QueueBound::Bounded(1));
        assert_eq!(s.steps.len(), 1);
        assert_eq!(s.steps[0].successor.0[1].queue, q(&[0]));

        let mut full = g.clone();
        full.0[1].queue = q(&[0]);
        // B still dequeues, but A's send is blocked
        let s = enabled_steps(&m, &full, QueueBound::Bounded(1));
        assert!(s
            .steps
            .iter()
            .all(|st| !matches!(st.label, ActionLabel::Send { .. })));
        let s0 = enabled_steps(&m, &g, QueueBound::Bounded(0));
        assert!(s0.steps.is_empty());
    }

    #[test]
    fn defer_selects_first_non_deferred() {
        let src = r#"
            machine R {
                state Init { defer ping; on pong goto Next; }
                state Next { ignore ping; }
            }
        "#;
        let m = parse_model_str(src).unwrap();
        let ping = m.alphabet.lookup("ping").unwrap();
        let pong = m.alphabet.lookup("pong").unwrap();
        let mut g = initial_state(&m);
        g.0[0].queue = ConcreteQueue(vec![ping, pong]);
        let s = enabled_steps(&m, &g, QueueBound::Unbounded);
        assert_eq!(s.steps.len(), 1);
        assert_eq!(s.steps[0].label, ActionLabel::Dequeue { event: pong });
        assert_eq!(s.steps[0].successor.0[0].queue, ConcreteQueue(vec![ping]));
    }

    #[test]
    fn all_deferred_blocks() {
        let m = parse_model_str("machine R { state S { defer a; on b goto S; } }").unwrap();
        let a = m.alphabet.lookup("a").unwrap();
        let mut g = initial_state(&m);
        g.0[0].queue = ConcreteQueue(vec![a, a]);
        let s = enabled_steps(&m, &g, QueueBound::Unbounded);
        assert!(s.steps.is_empty() && s.violations.is_empty());
    }

    #[test]
    fn missing_handler_is_a_violation() {
        let m = parse_model_str("machine R { state S { on b goto S; } }\nmachine T { state U { entry { send a to R; } } }").unwrap();
        let a = m.alphabet.lookup("a").unwrap();
        let mut g = initial_state(&m);
        g.0[0].queue = ConcreteQueue(vec![a]);
        let s = enabled_steps(&m, &g, QueueBound::Unbounded);
        assert_eq!(
            s.violations,
            vec![Violation::Responsiveness { machine: 0, event: a }]
        );
    }

    #[test]
    fn ignore_drops_event_and_stays() {
        let m = parse_model_str("machine R { state S { ignore a; } }").unwrap();
        let a = m.alphabet.lookup("a").unwrap();
        let mut g = initial_state(&m);
        g.0[0].queue = ConcreteQueue(vec![a, a]);
        let s = enabled_steps(&m, &g, QueueBound::Unbounded);
        assert_eq!(s.steps.len(), 1);
        assert_eq!(s.steps[0].successor.0[0].queue.len(), 1);
        assert_eq!(s.steps[0].successor.0[0].local, g.0[0].local);
    }

    #[test]
    fn head_assertions() {
        let src = r#"
            machine R {
                state Ignore_it { ignore flood; assert empty || head == flood; }
            }
            machine S { state Q { entry { send ping to R; } } }
        "#;
        let m = parse_model_str(src).unwrap();
        let flood = m.alphabet.lookup("flood").unwrap();
        let ping = m.alphabet.lookup("ping").unwrap();
        let mut g = initial_state(&m);
        g.0[0].queue = ConcreteQueue(vec![flood, ping]);
        assert!(check_local_assertion(&m, &g).is_empty());
        g.0[0].queue = ConcreteQueue(vec![ping]);
        let v = check_local_assertion(&m, &g);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].machine(), 0);
        let none = parse_model_str("machine M { state S { } }").unwrap();
        assert!(check_local_assertion(&none, &initial_state(&none)).is_empty());
    }

    #[test]
    fn register_overflow_is_reported() {
        let src = "machine M { var c: 0..1 = 1; state S { entry { set c = c + 1; } } }";
        let m = parse_model_str(src).unwrap();
        let g = initial_state(&m);
        let s = enabled_steps(&m, &g, QueueBound::Unbounded);
        assert!(s.steps.is_empty());
        assert!(matches!(s.violations[0], Violation::RegisterRange { value: 2, .. }));
    }

    #[test]
    fn encoding_is_injective_on_queue_boundaries() {
        let m = parse_model_str("machine A { state S { ignore a; } }\nmachine B { state S { ignore a; } }").unwrap();
        let a = m.alphabet.lookup("a").unwrap();
        let mut g1 = initial_state(&m);
        let mut g2 = g1.clone();
        g1.0[0].queue = ConcreteQueue(vec![a, a]);
        g2.0[0].queue = ConcreteQueue(vec![a]);
        g2.0[1].queue = ConcreteQueue(vec![a]);
        assert_ne!(g1.encode(), g2.encode());
    }
}
