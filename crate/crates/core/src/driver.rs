//! The verification loop: explore with growing queue bounds, abstract, and
//! test whether the abstract reach set is closed under abstract dequeues.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::abstraction::{project, AbstractReachSet, AbstractState};
use crate::explore::{explore, ExploreError, ExploreOptions, Exploration, Trace};
use crate::frontend::InvariantDecl;
use crate::invariants::{discharge_invariant, suggest_invariants, InvariantStatus};
use crate::model::{CqsModel, MachineIdx, Violation};
use crate::qutl::{check_abstract, Formula};
use crate::transformer::{apply_partial_transformer, Witness};

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub p0: usize,
    pub p_max: usize,
    pub k_max: usize,
    pub invariants: Vec<InvariantDecl>,
    /// Use invariants without discharging them.
    pub trust_invariants: bool,
    pub discharge_depth: usize,
    pub discharge_max_states: usize,
    pub explore: ExploreOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            p0: 0,
            p_max: 4,
            k_max: 10,
            invariants: Vec::new(),
            trust_invariants: false,
            discharge_depth: 16,
            discharge_max_states: 2_000_000,
            explore: ExploreOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InconclusiveReason {
    MaxK,
    Budget(String),
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Safe { k: usize, p: usize },
    Unsafe { k: usize, violation: Violation, trace: Trace },
    Inconclusive { reason: InconclusiveReason },
}

#[derive(Clone, Debug)]
pub struct InvariantEntry {
    pub machine: MachineIdx,
    pub formula: Formula,
    pub status: InvariantStatus,
}

/// One iteration of the loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KRow {
    pub p: usize,
    pub k: usize,
    pub concrete: usize,
    pub abstract_states: usize,
    pub transformer_ran: bool,
    pub novel: usize,
    pub filtered: usize,
}

#[derive(Clone, Debug)]
pub struct SpuriousState {
    pub state: AbstractState,
    pub witness: Witness,
    /// Index into the invariant list of the invariant that removed it.
    pub killed_by: Option<usize>,
    /// Closest states of the abstract reach set.
    pub nearest: Vec<AbstractState>,
}

#[derive(Clone, Debug)]
pub struct SpuriousReport {
    pub p: usize,
    pub k: usize,
    pub states: Vec<SpuriousState>,
    pub suggestions: Vec<(MachineIdx, Formula)>,
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub verdict: Verdict,
    pub rows: Vec<KRow>,
    pub invariants: Vec<InvariantEntry>,
    /// The most recent failed convergence test.
    pub spurious: Option<SpuriousReport>,
}

const NEAREST: usize = 3;

pub fn verify(model: &CqsModel, opts: &VerifyOptions) -> VerifyOutcome {
    let invariants: Vec<InvariantEntry> = opts
        .invariants
        .iter()
        .map(|d| InvariantEntry {
            machine: d.machine,
            formula: d.formula.clone(),
            status: if opts.trust_invariants {
                InvariantStatus::Trusted
            } else {
                discharge_invariant(model, d.machine, &d.formula, opts.discharge_depth, opts.discharge_max_states)
            },
        })
        .collect();
    let mut run = Run {
        model,
        opts,
        cache: BTreeMap::new(),
        rows: Vec::new(),
        spurious: None,
        invariants: &invariants,
    };
    let verdict = run.go();
    let Run { rows, spurious, .. } = run;
    VerifyOutcome {
        verdict,
        rows,
        invariants,
        spurious,
    }
}

struct Run<'a> {
    model: &'a CqsModel,
    opts: &'a VerifyOptions,
    cache: BTreeMap<usize, Exploration>,
    rows: Vec<KRow>,
    spurious: Option<SpuriousReport>,
    invariants: &'a [InvariantEntry],
}

enum Step {
    Done(Verdict),
    Refine,
}

impl Run<'_> {
    fn go(&mut self) -> Verdict {
        let p_max = self.opts.p_max.max(self.opts.p0);
        for p in self.opts.p0..=p_max {
            match self.with_prefix(p, p < p_max) {
                Step::Done(v) => return v,
                Step::Refine => continue,
            }
        }
        Verdict::Inconclusive {
            reason: InconclusiveReason::MaxK,
        }
    }

    fn reach(&mut self, k: usize) -> Result<&Exploration, ExploreError> {
        if !self.cache.contains_key(&k) {
            let ex = explore(self.model, k, &self.opts.explore)?;
            self.cache.insert(k, ex);
        }
        Ok(&self.cache[&k])
    }

    fn with_prefix(&mut self, p: usize, can_refine: bool) -> Step {
        let mut prev: Option<AbstractReachSet> = None;
        for k in 0..=self.opts.k_max {
            if self.opts.explore.deadline.is_some_and(|d| Instant::now() > d) {
                return Step::Done(budget(ExploreError::Deadline));
            }
            let ex = match self.reach(k) {
                Ok(ex) => ex,
                Err(e) => return Step::Done(budget(e)),
            };
            if let Some(v) = &ex.violation {
                return Step::Done(Verdict::Unsafe {
                    k,
                    violation: v.violation.clone(),
                    trace: v.trace.clone(),
                });
            }
            let abs = project(ex.reach.iter(), p, k);
            let mut row = KRow {
                p,
                k,
                concrete: ex.reach.len(),
                abstract_states: abs.len(),
                transformer_ran: false,
                novel: 0,
                filtered: 0,
            };
            // Monotonicity makes equal sizes mean equal sets.
            let stable = prev.as_ref().is_some_and(|a| a.len() == abs.len());
            if stable {
                row.transformer_ran = true;
                let t = apply_partial_transformer(self.model, &abs);
                row.novel = t.novel.len();
                let mut states = Vec::new();
                for (s, w) in &t.novel {
                    let killed_by = self.killer(s);
                    states.push(SpuriousState {
                        state: s.clone(),
                        witness: w.clone(),
                        killed_by,
                        nearest: nearest(&abs, s),
                    });
                }
                row.filtered = states.iter().filter(|s| s.killed_by.is_some()).count();
                let survivors = row.novel - row.filtered;
                self.rows.push(row);
                if survivors == 0 {
                    return Step::Done(Verdict::Safe { k, p });
                }
                let alive: Vec<AbstractState> = states
                    .iter()
                    .filter(|s| s.killed_by.is_none())
                    .map(|s| s.state.clone())
                    .collect();
                let reached: Vec<_> = self.cache[&k].reach.iter().cloned().collect();
                self.spurious = Some(SpuriousReport {
                    p,
                    k,
                    states,
                    suggestions: suggest_invariants(self.model, &reached, &alive, k),
                });
                if can_refine {
                    return Step::Refine;
                }
            } else {
                self.rows.push(row);
            }
            prev = Some(abs);
        }
        Step::Done(Verdict::Inconclusive {
            reason: InconclusiveReason::MaxK,
        })
    }

    fn killer(&self, s: &AbstractState) -> Option<usize> {
        self.invariants
            .iter()
            .position(|inv| inv.status.is_usable() && !check_abstract(&s.0[inv.machine].queue, &inv.formula))
    }
}

fn budget(e: ExploreError) -> Verdict {
    Verdict::Inconclusive {
        reason: InconclusiveReason::Budget(e.to_string()),
    }
}

/// Edit distance between two abstract states: differing control states
/// count one each, queues by Levenshtein distance over their listed events.
pub fn distance(a: &AbstractState, b: &AbstractState) -> usize {
    a.0.iter()
        .zip(&b.0)
        .map(|(x, y)| usize::from(x.local != y.local) + levenshtein(&x.queue.events(), &y.queue.events()))
        .sum()
}

fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = (diag + usize::from(x != y)).min(up + 1).min(row[j] + 1);
            diag = up;
        }
    }
    row[b.len()]
}

fn nearest(abs: &AbstractReachSet, s: &AbstractState) -> Vec<AbstractState> {
    let mut scored: Vec<(usize, usize)> = abs.states.iter().enumerate().map(|(i, a)| (distance(a, s), i)).collect();
    scored.sort();
    scored.into_iter().take(NEAREST).map(|(_, i)| abs.states[i].clone()).collect()
}
