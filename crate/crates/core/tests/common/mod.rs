//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use queuebound_core::abstraction::AbstractQueue;
use queuebound_core::model::EventId;
use queuebound_core::qutl::{Formula, RelOp};
use rand::Rng;

/// Subformulas of `phi` in post-order, so children precede parents.
fn subformulas(phi: &Formula, out: &mut Vec<Formula>) -> usize {
    let idx = |out: &mut Vec<Formula>, f: &Formula| {
        if let Some(i) = out.iter().position(|g| g == f) {
            i
        } else {
            out.push(f.clone());
            out.len() - 1
        }
    };
    match phi {
        Formula::Next(f) | Formula::Eventually(f) | Formula::Globally(f) | Formula::Not(f) => {
            subformulas(f, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            subformulas(a, out);
            subformulas(b, out);
        }
        _ => {}
    }
    idx(out, phi)
}

/// Truth of every subformula at one position, plus capped event counts of
/// the remaining word.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Signature {
    truth: Vec<bool>,
    counts: Vec<u32>,
}

struct Evaluator {
    subs: Vec<Formula>,
    cap: u32,
    sigma: usize,
}

impl Evaluator {
    fn new(phi: &Formula, sigma: usize) -> Self {
        let mut subs = Vec::new();
        subformulas(phi, &mut subs);
        Evaluator {
            cap: phi.max_constant() + 1,
            subs,
            sigma,
        }
    }

    fn pos(&self, f: &Formula) -> usize {
        self.subs.iter().position(|g| g == f).expect("subformula")
    }

    /// The signature of the empty word.
    fn at_end(&self) -> Signature {
        let mut truth: Vec<bool> = Vec::with_capacity(self.subs.len());
        for f in &self.subs {
            let v = match f {
                Formula::True => true,
                Formula::False | Formula::Head(_) | Formula::Next(_) | Formula::Eventually(_) => false,
                Formula::Rel(_, op, c) => op.eval(0, *c),
                Formula::Globally(_) => true,
                Formula::Not(g) => !truth[self.pos(g)],
                Formula::And(a, b) => truth[self.pos(a)] && truth[self.pos(b)],
                Formula::Or(a, b) => truth[self.pos(a)] || truth[self.pos(b)],
            };
            truth.push(v);
        }
        Signature {
            truth,
            counts: vec![0; self.sigma],
        }
    }

    /// The signature of `e · w` given that of `w`.
    fn prepend(&self, e: EventId, next: &Signature) -> Signature {
        let mut counts = next.counts.clone();
        counts[e.index()] = (counts[e.index()] + 1).min(self.cap);
        let mut truth: Vec<bool> = Vec::with_capacity(self.subs.len());
        for (i, f) in self.subs.iter().enumerate() {
            let v = match f {
                Formula::True => true,
                Formula::False => false,
                Formula::Head(x) => *x == e,
                Formula::Rel(x, op, c) => op.eval(counts[x.index()], *c),
                Formula::Next(g) => next.truth[self.pos(g)],
                Formula::Eventually(g) => truth[self.pos(g)] || next.truth[i],
                Formula::Globally(g) => truth[self.pos(g)] && next.truth[i],
                Formula::Not(g) => !truth[self.pos(g)],
                Formula::And(a, b) => truth[self.pos(a)] && truth[self.pos(b)],
                Formula::Or(a, b) => truth[self.pos(a)] || truth[self.pos(b)],
            };
            truth.push(v);
        }
        Signature { truth, counts }
    }
}

/// Exact abstract satisfaction: whether any concretization of `q` satisfies
/// `phi`. Words are read backwards through the regular language of `q`,
/// keeping the set of signatures of the words read so far.
pub fn exists_concretization(q: &AbstractQueue, phi: &Formula, sigma: usize) -> bool {
    let ev = Evaluator::new(phi, sigma);
    let mut sigs: HashSet<Signature> = [ev.at_end()].into_iter().collect();
    for i in (0..q.suffix.len()).rev() {
        // block (suffix[..=i])* then the first occurrence suffix[i]
        let block = &q.suffix[..=i];
        let mut frontier: Vec<Signature> = sigs.iter().cloned().collect();
        while let Some(s) = frontier.pop() {
            for &e in block {
                let n = ev.prepend(e, &s);
                if sigs.insert(n.clone()) {
                    frontier.push(n);
                }
            }
        }
        sigs = sigs.iter().map(|s| ev.prepend(q.suffix[i], s)).collect();
    }
    for &e in q.prefix.iter().rev() {
        sigs = sigs.iter().map(|s| ev.prepend(e, s)).collect();
    }
    let root = ev.subs.len() - 1;
    sigs.iter().any(|s| s.truth[root])
}

pub fn random_atom<R: Rng>(rng: &mut R, sigma: usize, max_const: u32) -> Formula {
    let e = EventId(rng.gen_range(0..sigma as u8));
    match rng.gen_range(0..10) {
        0 => Formula::True,
        1 => Formula::False,
        2..=4 => Formula::Head(e),
        _ => Formula::Rel(e, RelOp::ALL[rng.gen_range(0..5)], rng.gen_range(0..=max_const)),
    }
}

/// A random formula of depth at most `depth`. `and` enables conjunctions.
pub fn random_formula<R: Rng>(rng: &mut R, sigma: usize, depth: usize, max_const: u32, and: bool) -> Formula {
    if depth == 0 || rng.gen_range(0..4) == 0 {
        return random_atom(rng, sigma, max_const);
    }
    let sub = |rng: &mut R| random_formula(rng, sigma, depth - 1, max_const, and);
    match rng.gen_range(0..if and { 7 } else { 6 }) {
        0 => Formula::next(sub(rng)),
        1 => Formula::eventually(sub(rng)),
        2 => Formula::globally(sub(rng)),
        3 => Formula::not(sub(rng)),
        4 | 5 => {
            let a = sub(rng);
            Formula::or(a, sub(rng))
        }
        _ => {
            let a = sub(rng);
            Formula::and(a, sub(rng))
        }
    }
}

/// A random well-formed abstract queue with at most `max_len` listed events.
pub fn random_queue<R: Rng>(rng: &mut R, sigma: usize, p: usize, max_len: usize) -> AbstractQueue {
    let mut prefix = Vec::new();
    let plen = rng.gen_range(0..=p.min(max_len));
    for _ in 0..plen {
        prefix.push(EventId(rng.gen_range(0..sigma as u8)));
    }
    let mut suffix = Vec::new();
    if plen == p {
        let slen = rng.gen_range(0..=sigma.min(max_len - plen));
        let mut pool: Vec<EventId> = (0..sigma as u8).map(EventId).collect();
        for _ in 0..slen {
            suffix.push(pool.swap_remove(rng.gen_range(0..pool.len())));
        }
    }
    AbstractQueue::new(prefix, suffix, p).expect("well-formed")
}
