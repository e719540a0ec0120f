//! Abstract dequeue: the best abstract transformer of the list abstraction,
//! restricted to dequeue actions.
//!
//! Removing the selected event from a concrete queue can only change the
//! abstraction in one way: the removed event was a first occurrence, so its
//! next occurrence (if any) becomes visible. Where that next occurrence sits
//! relative to the remaining first occurrences is unknown, and every option
//! is produced.

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::abstraction::{AbstractMachine, AbstractQueue, AbstractReachSet, AbstractState};
use crate::model::{dequeue_effect, CqsModel, DequeueEffect, EventId, Instr, MachineIdx, StateDef};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformerError {
    #[error("cannot dequeue from an empty queue")]
    EmptyQueue,
}

/// Abstract successors after removing the listed event at index `j`.
fn remove_at(q: &AbstractQueue, j: usize) -> Vec<AbstractQueue> {
    let plen = q.prefix.len();
    if j < plen {
        let mut prefix = q.prefix.clone();
        prefix.remove(j);
        let Some((&promoted, rest)) = q.suffix.split_first() else {
            return vec![AbstractQueue {
                prefix,
                suffix: Vec::new(),
                p: q.p,
            }];
        };
        prefix.push(promoted);
        reinsert(&prefix, rest, promoted, 0, q.p)
    } else {
        let i = j - plen;
        let e = q.suffix[i];
        let mut rest = q.suffix.clone();
        rest.remove(i);
        reinsert(&q.prefix, &rest, e, i, q.p)
    }
}

/// `rest` without `e`, then `e` inserted at each position from `from` on.
fn reinsert(prefix: &[EventId], rest: &[EventId], e: EventId, from: usize, p: usize) -> Vec<AbstractQueue> {
    let mk = |suffix: Vec<EventId>| AbstractQueue {
        prefix: prefix.to_vec(),
        suffix,
        p,
    };
    let mut out = vec![mk(rest.to_vec())];
    for pos in from..=rest.len() {
        let mut s = rest.to_vec();
        s.insert(pos, e);
        out.push(mk(s));
    }
    out
}

/// Removes the head event.
pub fn dequeue_successors(q: &AbstractQueue) -> Result<(EventId, Vec<AbstractQueue>), TransformerError> {
    let head = q.head().ok_or(TransformerError::EmptyQueue)?;
    Ok((head, remove_at(q, 0)))
}

/// Removes the first event that is not deferred; `Ok(None)` when every
/// event is deferred and the machine blocks.
pub fn defer_dequeue_successors(
    q: &AbstractQueue,
    deferred: impl Fn(EventId) -> bool,
) -> Result<Option<(EventId, Vec<AbstractQueue>)>, TransformerError> {
    if q.is_empty() {
        return Err(TransformerError::EmptyQueue);
    }
    let events = q.events();
    Ok(events
        .iter()
        .position(|e| !deferred(*e))
        .map(|j| (events[j], remove_at(q, j))))
}

fn select(state: &StateDef, q: &AbstractQueue) -> Option<(EventId, Vec<AbstractQueue>)> {
    if q.is_empty() {
        return None;
    }
    defer_dequeue_successors(q, |e| state.is_deferred(e)).ok().flatten()
}

/// Where a novel state came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub source: AbstractState,
    pub machine: MachineIdx,
    pub event: EventId,
}

#[derive(Clone, Debug, Default)]
pub struct TransformerResult {
    pub produced: IndexSet<AbstractState>,
    /// Produced states outside the input set, with one witness each.
    pub novel: IndexMap<AbstractState, Witness>,
}

/// Applies abstract dequeue steps of every machine to every state of `reach`.
pub fn apply_partial_transformer(model: &CqsModel, reach: &AbstractReachSet) -> TransformerResult {
    let mut out = TransformerResult::default();
    for src in &reach.states {
        for (i, def) in model.machines.iter().enumerate() {
            let am = &src.0[i];
            let Instr::Wait(s) = def.code[am.local.loc as usize] else {
                continue;
            };
            let Some((event, queues)) = select(&def.states[s], &am.queue) else {
                continue;
            };
            // Missing handlers are already reported on the concrete states.
            let DequeueEffect::Consume(local) = dequeue_effect(def, &am.local, s, event) else {
                continue;
            };
            for queue in queues {
                let mut succ = src.clone();
                succ.0[i] = AbstractMachine {
                    local: local.clone(),
                    queue,
                };
                if !reach.contains(&succ) && !out.novel.contains_key(&succ) {
                    out.novel.insert(
                        succ.clone(),
                        Witness {
                            source: src.clone(),
                            machine: i,
                            event,
                        },
                    );
                }
                out.produced.insert(succ);
            }
        }
    }
    out
}
