//! Abstract satisfaction: does some concretization of an abstract queue
//! satisfy a formula?
//!
//! The search runs over pairs of an LTS state and a set of obligations that
//! the remaining word, read from that state, has to meet. Temporal operators
//! unfold one position at a time and counting atoms lose one unit whenever
//! their event is read, so the pair space is finite and a plain reachability
//! search of the final state decides the question. Conjunctions are split:
//! each conjunct only needs some path of its own, which can answer `true`
//! where no single concretization satisfies both sides.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::lts::{build_lts, LtsLabel, QueueLts};
use super::{eval_concrete, to_nnf, Formula, RelOp};
use crate::abstraction::AbstractQueue;
use crate::model::EventId;

type Obligations = BTreeSet<Formula>;

/// `q ⊨α φ` with conjunction approximated from above.
pub fn check_abstract(q: &AbstractQueue, phi: &Formula) -> bool {
    let lts = build_lts(q);
    let mut checker = Checker {
        lts: &lts,
        memo: HashMap::new(),
    };
    let start: Obligations = [to_nnf(phi)].into_iter().collect();
    checker.reach(lts.start, start)
}

struct Checker<'a> {
    lts: &'a QueueLts,
    memo: HashMap<(usize, Formula), bool>,
}

/// One way of meeting the obligations at the current position.
#[derive(Clone, Default)]
struct Branch {
    head: Option<EventId>,
    forbidden: Vec<EventId>,
    counts: Vec<(EventId, RelOp, u32)>,
    next: Obligations,
}

impl Checker<'_> {
    fn reach(&mut self, start: usize, obligations: Obligations) -> bool {
        let mut seen: HashSet<(usize, Obligations)> = HashSet::new();
        let mut work = VecDeque::new();
        seen.insert((start, obligations.clone()));
        work.push_back((start, obligations));
        while let Some((s, obs)) = work.pop_front() {
            let LtsLabel::Events(label) = &self.lts.labels[s] else {
                if obs.iter().all(|f| eval_concrete(&[], f)) {
                    return true;
                }
                continue;
            };
            let label = label.clone();
            let mut branches = Vec::new();
            let todo: Vec<Formula> = obs.into_iter().collect();
            if !self.expand(s, todo, Branch::default(), &mut branches) {
                continue;
            }
            for b in branches {
                for &e in &label {
                    if b.head.is_some_and(|h| h != e) || b.forbidden.contains(&e) {
                        continue;
                    }
                    let Some(next) = step_counts(&b, e) else {
                        continue;
                    };
                    for &n in self.lts.successors(s) {
                        let key = (n, next.clone());
                        if seen.insert(key.clone()) {
                            work.push_back(key);
                        }
                    }
                }
            }
        }
        false
    }

    /// Satisfiability of a single formula from state `s`, cached.
    fn holds_from(&mut self, s: usize, f: Formula) -> bool {
        if let Some(&r) = self.memo.get(&(s, f.clone())) {
            return r;
        }
        let r = self.reach(s, [f.clone()].into_iter().collect());
        self.memo.insert((s, f), r);
        r
    }

    /// Collects the branches for the current position. Returns false when
    /// no branch can exist.
    fn expand(&mut self, s: usize, mut todo: Vec<Formula>, mut acc: Branch, out: &mut Vec<Branch>) -> bool {
        while let Some(f) = todo.pop() {
            match f {
                Formula::True => {}
                Formula::False => return false,
                Formula::Head(e) => {
                    if acc.head.is_some_and(|h| h != e) || acc.forbidden.contains(&e) {
                        return false;
                    }
                    acc.head = Some(e);
                }
                Formula::Not(inner) => match *inner {
                    Formula::Head(e) => {
                        if acc.head == Some(e) {
                            return false;
                        }
                        acc.forbidden.push(e);
                    }
                    other => {
                        let g = to_nnf(&Formula::not(other));
                        todo.push(g);
                    }
                },
                Formula::Rel(e, op, c) => acc.counts.push((e, op, c)),
                Formula::Next(g) => {
                    acc.next.insert(*g);
                }
                Formula::Eventually(g) => {
                    let mut later = acc.clone();
                    later.next.insert(Formula::Eventually(g.clone()));
                    let a = self.expand(s, todo.clone(), later, out);
                    todo.push(*g);
                    let b = self.expand(s, todo, acc, out);
                    return a || b;
                }
                Formula::Globally(g) => {
                    acc.next.insert(Formula::Globally(g.clone()));
                    todo.push(*g);
                }
                Formula::Or(l, r) => {
                    let mut left = todo.clone();
                    left.push(*l);
                    let a = self.expand(s, left, acc.clone(), out);
                    todo.push(*r);
                    let b = self.expand(s, todo, acc, out);
                    return a || b;
                }
                Formula::And(l, r) => {
                    if !self.holds_from(s, *l) || !self.holds_from(s, *r) {
                        return false;
                    }
                }
            }
        }
        out.push(acc);
        true
    }
}

/// Obligations for the next position after reading `e`, or `None` if a
/// counting atom fails.
fn step_counts(b: &Branch, e: EventId) -> Option<Obligations> {
    let mut next = b.next.clone();
    for &(x, op, c) in &b.counts {
        let f = if x == e { decrement(x, op, c)? } else { Formula::Rel(x, op, c) };
        if f != Formula::True {
            next.insert(f);
        }
    }
    Some(next)
}

/// `#x op c` at position i, given that position i holds an `x`, as an
/// obligation on position i + 1.
fn decrement(x: EventId, op: RelOp, c: u32) -> Option<Formula> {
    match (op, c) {
        (RelOp::Lt, 0 | 1) | (RelOp::Le | RelOp::Eq, 0) => None,
        (RelOp::Ge, 0 | 1) | (RelOp::Gt, 0) => Some(Formula::True),
        (op, c) => Some(Formula::Rel(x, op, c - 1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::all_abstract_queues;
    use crate::frontend::parse_qutl;
    use crate::model::Alphabet;
    use crate::qutl::brute_force_abstract;

    fn q(text: &str, p: usize, a: &Alphabet) -> AbstractQueue {
        AbstractQueue::parse(text, p, a).unwrap()
    }

    #[test]
    fn ordering_examples() {
        let a = Alphabet::from_names(["a", "b", "c"]);
        let f = parse_qutl("G (a -> G !b)", &a).unwrap();
        assert!(check_abstract(&q("b.b|b.a", 2, &a), &f));
        let g = parse_qutl("G (a -> X b)", &a).unwrap();
        assert!(!check_abstract(&q("a.c|b", 2, &a), &g));
    }

    #[test]
    fn conjunction_is_split() {
        let a = Alphabet::from_names(["a", "b"]);
        let qa = q("a|a.b", 1, &a);
        let psi = parse_qutl("#a >= 3", &a).unwrap();
        let npsi = parse_qutl("!(#a >= 3)", &a).unwrap();
        let both = parse_qutl("#a >= 3 && !(#a >= 3)", &a).unwrap();
        assert!(check_abstract(&qa, &psi));
        assert!(check_abstract(&qa, &npsi));
        assert!(check_abstract(&qa, &both));
        assert!(!brute_force_abstract(&qa, &both, 6));
    }

    #[test]
    fn empty_queue_uses_concrete_semantics() {
        let a = Alphabet::from_names(["a", "b"]);
        let e = AbstractQueue::empty(0);
        for src in ["G false", "F true", "a", "!a", "#a = 0", "X a", "!X a", "G (#a >= 2)"] {
            let f = parse_qutl(src, &a).unwrap();
            assert_eq!(check_abstract(&e, &f), eval_concrete(&[], &f), "{src}");
        }
    }

    #[test]
    fn nested_temporal_on_gap_states() {
        let a = Alphabet::from_names(["a", "b"]);
        // a{a}* b{a,b}*: some word has every position followed by an a
        // except the last, which G X fails on
        let gq = q("|a.b", 0, &a);
        assert!(!check_abstract(&gq, &parse_qutl("G X a", &a).unwrap()));
        assert!(check_abstract(&gq, &parse_qutl("F (b && X a)", &a).unwrap()));
        assert!(check_abstract(&gq, &parse_qutl("X X X (#b >= 2)", &a).unwrap()));
    }

    #[test]
    fn matches_brute_force_without_conjunction() {
        let a = Alphabet::from_names(["a", "b", "c"]);
        let formulas = [
            "G (a -> G !b)",
            "F (#a >= 2)",
            "G (#c <= 1)",
            "X (b || F c)",
            "!F (#b = 2)",
            "G (b -> X a) || #a > 2",
            "!(G (#a < 2) || X !c)",
            "F !a",
        ];
        for p in 0..3 {
            for aq in all_abstract_queues(3, p).into_iter().filter(|x| x.len() <= 3) {
                for src in formulas {
                    let f = parse_qutl(src, &a).unwrap();
                    let bound = f.max_constant() as usize + 2;
                    assert_eq!(
                        check_abstract(&aq, &f),
                        brute_force_abstract(&aq, &f, bound),
                        "{} {src}",
                        aq.render(&a)
                    );
                }
            }
        }
    }
}
