//! Queue temporal logic: concrete semantics, negation normal form, the LTS
//! of an abstract queue and abstract satisfaction.

mod brute;
mod check;
mod formula;
mod lts;

pub use brute::{brute_force_abstract, concretizations};
pub use check::check_abstract;
pub use formula::{Formula, FormulaDisplay, RelOp};
pub use lts::{build_lts, LtsLabel, QueueLts};

use crate::model::EventId;

/// Concrete satisfaction `Q ⊨ φ`.
pub fn eval_concrete(queue: &[EventId], phi: &Formula) -> bool {
    match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Head(e) => queue.first() == Some(e),
        Formula::Rel(e, op, c) => {
            let n = queue.iter().filter(|x| *x == e).count() as u32;
            op.eval(n, *c)
        }
        Formula::Next(f) => !queue.is_empty() && eval_concrete(&queue[1..], f),
        Formula::Eventually(f) => (0..queue.len()).any(|i| eval_concrete(&queue[i..], f)),
        Formula::Globally(f) => (0..queue.len()).all(|i| eval_concrete(&queue[i..], f)),
        Formula::Not(f) => !eval_concrete(queue, f),
        Formula::And(a, b) => eval_concrete(queue, a) && eval_concrete(queue, b),
        Formula::Or(a, b) => eval_concrete(queue, a) || eval_concrete(queue, b),
    }
}

/// Pushes negations down to `Head` and `Rel` atoms.
///
/// Negated relations become relations: `!(#e = c)` turns into
/// `#e > c || #e < c`, the other operators flip. Only `Not(Head(_))`
/// remains as a negation in the result. `!X f` becomes
/// `G false || X !f`, where `G false` says the queue is empty.
pub fn to_nnf(phi: &Formula) -> Formula {
    nnf(phi, false)
}

fn nnf(phi: &Formula, neg: bool) -> Formula {
    match (phi, neg) {
        (Formula::True, false) | (Formula::False, true) => Formula::True,
        (Formula::True, true) | (Formula::False, false) => Formula::False,
        (Formula::Head(e), false) => Formula::Head(*e),
        (Formula::Head(e), true) => Formula::not(Formula::Head(*e)),
        (Formula::Rel(e, op, c), false) => Formula::Rel(*e, *op, *c),
        (Formula::Rel(e, op, c), true) => match op {
            RelOp::Lt => Formula::Rel(*e, RelOp::Ge, *c),
            RelOp::Le => Formula::Rel(*e, RelOp::Gt, *c),
            RelOp::Ge => Formula::Rel(*e, RelOp::Lt, *c),
            RelOp::Gt => Formula::Rel(*e, RelOp::Le, *c),
            RelOp::Eq => Formula::or(Formula::Rel(*e, RelOp::Gt, *c), Formula::Rel(*e, RelOp::Lt, *c)),
        },
        (Formula::Next(f), false) => Formula::next(nnf(f, false)),
        // `!X f` also holds on the empty queue, where `X !f` does not.
        (Formula::Next(f), true) => Formula::or(
            Formula::globally(Formula::False),
            Formula::next(nnf(f, true)),
        ),
        (Formula::Eventually(f), false) => Formula::eventually(nnf(f, false)),
        (Formula::Eventually(f), true) => Formula::globally(nnf(f, true)),
        (Formula::Globally(f), false) => Formula::globally(nnf(f, false)),
        (Formula::Globally(f), true) => Formula::eventually(nnf(f, true)),
        (Formula::Not(f), n) => nnf(f, !n),
        (Formula::And(a, b), false) => Formula::and(nnf(a, false), nnf(b, false)),
        (Formula::And(a, b), true) => Formula::or(nnf(a, true), nnf(b, true)),
        (Formula::Or(a, b), false) => Formula::or(nnf(a, false), nnf(b, false)),
        (Formula::Or(a, b), true) => Formula::and(nnf(a, true), nnf(b, true)),
    }
}

/// True when negations only wrap `Head` atoms.
pub fn is_nnf(phi: &Formula) -> bool {
    match phi {
        Formula::Not(f) => matches!(**f, Formula::Head(_)),
        Formula::True | Formula::False | Formula::Head(_) | Formula::Rel(..) => true,
        Formula::Next(f) | Formula::Eventually(f) | Formula::Globally(f) => is_nnf(f),
        Formula::And(a, b) | Formula::Or(a, b) => is_nnf(a) && is_nnf(b),
    }
}
