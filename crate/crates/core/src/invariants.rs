//! Machine invariants: bounded discharge and candidate suggestions.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::abstraction::AbstractState;
use crate::model::{CqsModel, EventId, Handler, Instr, LocalState, MachineIdx};
use crate::qutl::{check_abstract, eval_concrete, Formula, RelOp};

/// Evidence level of an invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum InvariantStatus {
    /// Accepted without checking.
    Trusted,
    /// Holds on every queue content of length up to `depth`.
    Discharged { depth: usize },
    /// A queue content that violates the invariant.
    Failed { witness: Vec<EventId> },
    /// The search hit its state budget first.
    Unknown { explored: usize },
}

impl InvariantStatus {
    pub fn is_usable(&self) -> bool {
        matches!(self, InvariantStatus::Trusted | InvariantStatus::Discharged { .. })
    }
}

/// Machines whose code sends to `target`.
pub fn senders_of(model: &CqsModel, target: MachineIdx) -> Vec<MachineIdx> {
    (0..model.len())
        .filter(|&m| {
            model.machines[m]
                .code
                .iter()
                .any(|ins| matches!(ins, Instr::Send { target: t, .. } if *t == target))
        })
        .collect()
}

/// Successors of one sender run in isolation: receives pick any handled
/// event. Yields the new local state and the event sent to `target`, if any.
fn isolated_steps(model: &CqsModel, m: MachineIdx, local: &LocalState, target: MachineIdx) -> Vec<(LocalState, Option<EventId>)> {
    let def = &model.machines[m];
    let mut out = Vec::new();
    match &def.code[local.loc as usize] {
        Instr::Send { event, target: t, next } => {
            let next = LocalState {
                loc: def.settle(*next, &local.regs),
                regs: local.regs.clone(),
            };
            out.push((next, (*t == target).then_some(*event)));
        }
        Instr::Set { reg, value, next } => {
            let v = value.eval(&local.regs);
            let r = &def.registers[*reg];
            if (r.min..=r.max).contains(&v) {
                let mut regs = local.regs.clone();
                regs[*reg] = v;
                out.push((
                    LocalState {
                        loc: def.settle(*next, &regs),
                        regs,
                    },
                    None,
                ));
            }
        }
        Instr::Wait(s) => {
            for h in def.states[*s].handlers.values() {
                let next = match h {
                    Handler::On(addr) => LocalState {
                        loc: def.settle(*addr, &local.regs),
                        regs: local.regs.clone(),
                    },
                    Handler::Ignore => local.clone(),
                    Handler::Defer => continue,
                };
                if !out.iter().any(|(l, _)| *l == next) {
                    out.push((next, None));
                }
            }
        }
        Instr::Branch { .. } | Instr::Jump(_) => unreachable!("locations are settled"),
    }
    out
}

/// Checks `phi` on every content of `machine`'s queue of length at most
/// `depth` that its senders can produce on their own.
///
/// Every sent event is either kept or later removed, so the candidate
/// contents are the subsequences of interleaved send sequences.
pub fn discharge_invariant(
    model: &CqsModel,
    machine: MachineIdx,
    phi: &Formula,
    depth: usize,
    max_states: usize,
) -> InvariantStatus {
    let senders = senders_of(model, machine);
    let start: (Vec<LocalState>, Vec<EventId>) = (
        senders.iter().map(|&m| model.machines[m].initial_local()).collect(),
        Vec::new(),
    );
    let mut seen = HashSet::new();
    let mut work = VecDeque::new();
    seen.insert(start.clone());
    work.push_back(start);
    while let Some((locals, word)) = work.pop_front() {
        if !eval_concrete(&word, phi) {
            return InvariantStatus::Failed { witness: word };
        }
        for (si, &m) in senders.iter().enumerate() {
            for (next, sent) in isolated_steps(model, m, &locals[si], machine) {
                let mut ls = locals.clone();
                ls[si] = next;
                let mut words = vec![word.clone()];
                if let Some(e) = sent {
                    if word.len() < depth {
                        let mut w = word.clone();
                        w.push(e);
                        words.push(w);
                    }
                }
                for w in words {
                    let key = (ls.clone(), w);
                    if seen.insert(key.clone()) {
                        if seen.len() > max_states {
                            return InvariantStatus::Unknown { explored: seen.len() };
                        }
                        work.push_back(key);
                    }
                }
            }
        }
    }
    InvariantStatus::Discharged { depth }
}

/// Candidate invariants that would remove some of the `novel` states and
/// hold on every concrete queue in `reached`.
pub fn suggest_invariants(
    model: &CqsModel,
    reached: &[crate::model::GlobalState],
    novel: &[AbstractState],
    k: usize,
) -> Vec<(MachineIdx, Formula)> {
    let mut out: Vec<(MachineIdx, Formula)> = Vec::new();
    let holds_everywhere =
        |m: MachineIdx, f: &Formula| reached.iter().all(|g| eval_concrete(g.0[m].queue.events(), f));
    let kills = |m: MachineIdx, f: &Formula| novel.iter().any(|s| !check_abstract(&s.0[m].queue, f));
    for m in 0..model.len() {
        // ordering: e1 is never followed by e2
        let mut pairs: Vec<(EventId, EventId)> = Vec::new();
        for s in novel {
            let evs = s.0[m].queue.events();
            for w in evs.windows(2) {
                if w[0] != w[1] && !pairs.contains(&(w[0], w[1])) {
                    pairs.push((w[0], w[1]));
                }
            }
        }
        for (e1, e2) in pairs {
            let f = Formula::globally(Formula::implies(
                Formula::Head(e1),
                Formula::globally(Formula::not(Formula::Head(e2))),
            ));
            if holds_everywhere(m, &f) && kills(m, &f) && !out.iter().any(|(mm, g)| *mm == m && *g == f) {
                out.push((m, f));
            }
        }
        // counting: the largest count seen, if the bound is below k
        let mut counts: Vec<Formula> = Vec::new();
        for e in model.alphabet.ids() {
            let c = reached
                .iter()
                .map(|g| g.0[m].queue.events().iter().filter(|x| **x == e).count())
                .max()
                .unwrap_or(0);
            if c < k {
                counts.push(Formula::Rel(e, RelOp::Le, c as u32));
            }
        }
        if let Some(f) = counts.into_iter().reduce(Formula::and) {
            if kills(m, &f) {
                out.push((m, f));
            }
        }
    }
    out
}
