//! Breadth-first computation of the states reachable under a queue bound.

use std::time::Instant;

use indexmap::IndexSet;
use thiserror::Error;

use crate::model::{
    check_local_assertion, enabled_steps, initial_state, ActionLabel, CqsModel, GlobalState, MachineIdx,
    QueueBound, Violation,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExploreError {
    #[error("state budget of {0} exceeded")]
    StateBudget(usize),
    #[error("time budget exceeded")]
    Deadline,
    #[error("state is not in the reach set")]
    TargetNotReached,
}

#[derive(Clone, Debug)]
pub struct ExploreOptions {
    pub max_states: usize,
    pub deadline: Option<Instant>,
    /// Stop at the first violation instead of completing the fixpoint.
    pub fail_fast: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        Self {
            max_states: 10_000_000,
            deadline: None,
            fail_fast: false,
        }
    }
}

/// `R_k` in BFS discovery order, with a predecessor for every state.
#[derive(Clone, Debug)]
pub struct ReachSet {
    pub states: IndexSet<GlobalState>,
    /// `(predecessor index, machine, action)`; `None` for the initial state.
    pub parent: Vec<Option<(usize, MachineIdx, ActionLabel)>>,
    pub bound: usize,
}

impl ReachSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, g: &GlobalState) -> bool {
        self.states.contains(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GlobalState> {
        self.states.iter()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub machine: MachineIdx,
    pub label: ActionLabel,
    pub state: GlobalState,
}

/// A path from the initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub initial: GlobalState,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &GlobalState {
        self.steps.last().map_or(&self.initial, |s| &s.state)
    }

    pub fn render(&self, model: &CqsModel) -> String {
        let mut out = format!("  {}\n", self.initial.render(model));
        for s in &self.steps {
            out.push_str(&format!(
                "  --{}: {}-->\n  {}\n",
                model.machines[s.machine].name,
                s.label.render(model),
                s.state.render(model)
            ));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct FoundViolation {
    pub violation: Violation,
    pub state: GlobalState,
    pub trace: Trace,
}

#[derive(Clone, Debug)]
pub struct Exploration {
    pub reach: ReachSet,
    /// The violation met first in BFS order.
    pub violation: Option<FoundViolation>,
}

/// Computes `R_k` and the first violating state.
pub fn explore(model: &CqsModel, k: usize, opts: &ExploreOptions) -> Result<Exploration, ExploreError> {
    let bound = QueueBound::Bounded(k);
    let mut reach = ReachSet {
        states: IndexSet::new(),
        parent: Vec::new(),
        bound: k,
    };
    reach.states.insert(initial_state(model));
    reach.parent.push(None);
    let mut found: Option<(usize, Violation)> = None;
    let mut i = 0;
    while i < reach.states.len() {
        if i % 4096 == 0 && opts.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(ExploreError::Deadline);
        }
        let g = reach.states[i].clone();
        let succ = enabled_steps(model, &g, bound);
        if found.is_none() {
            let v = check_local_assertion(model, &g)
                .into_iter()
                .next()
                .or_else(|| succ.violations.first().cloned());
            if let Some(v) = v {
                found = Some((i, v));
                if opts.fail_fast {
                    break;
                }
            }
        }
        for step in succ.steps {
            let (_, fresh) = reach.states.insert_full(step.successor);
            if fresh {
                reach.parent.push(Some((i, step.machine, step.label)));
                if reach.states.len() > opts.max_states {
                    return Err(ExploreError::StateBudget(opts.max_states));
                }
            }
        }
        i += 1;
    }
    let violation = found.map(|(idx, violation)| FoundViolation {
        violation,
        state: reach.states[idx].clone(),
        trace: trace_to_index(&reach, idx),
    });
    Ok(Exploration { reach, violation })
}

fn trace_to_index(reach: &ReachSet, mut idx: usize) -> Trace {
    let mut steps = Vec::new();
    while let Some((prev, machine, label)) = &reach.parent[idx] {
        steps.push(TraceStep {
            machine: *machine,
            label: *label,
            state: reach.states[idx].clone(),
        });
        idx = *prev;
    }
    steps.reverse();
    Trace {
        initial: reach.states[0].clone(),
        steps,
    }
}

/// Shortest path to `target` along BFS predecessors.
pub fn reconstruct_trace(reach: &ReachSet, target: &GlobalState) -> Result<Trace, ExploreError> {
    let idx = reach.states.get_index_of(target).ok_or(ExploreError::TargetNotReached)?;
    Ok(trace_to_index(reach, idx))
}
