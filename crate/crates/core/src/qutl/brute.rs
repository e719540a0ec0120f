use super::{eval_concrete, Formula};
use crate::abstraction::AbstractQueue;
use crate::model::EventId;

/// All concretizations of `q` in which every starred block holds at most
/// `bound` events.
pub fn concretizations(q: &AbstractQueue, bound: usize) -> Vec<Vec<EventId>> {
    let mut out = vec![q.prefix.clone()];
    for (i, e) in q.suffix.iter().enumerate() {
        let block = &q.suffix[..=i];
        let mut next = Vec::new();
        for w in out {
            let mut w = w;
            w.push(*e);
            extend_blocks(&w, block, bound, &mut next);
        }
        out = next;
    }
    out
}

fn extend_blocks(base: &[EventId], block: &[EventId], bound: usize, out: &mut Vec<Vec<EventId>>) {
    let mut layer = vec![base.to_vec()];
    out.push(base.to_vec());
    for _ in 0..bound {
        let mut grown = Vec::with_capacity(layer.len() * block.len());
        for w in &layer {
            for e in block {
                let mut v = w.clone();
                v.push(*e);
                grown.push(v);
            }
        }
        out.extend(grown.iter().cloned());
        layer = grown;
    }
}

/// Whether some bounded concretization of `q` satisfies `phi`; a testing
/// oracle for [`check_abstract`](super::check_abstract).
pub fn brute_force_abstract(q: &AbstractQueue, phi: &Formula, bound: usize) -> bool {
    concretizations(q, bound).iter().any(|w| eval_concrete(w, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_qutl;
    use crate::model::Alphabet;

    #[test]
    fn examples() {
        let a = Alphabet::from_names(["a", "b"]);
        let q = AbstractQueue::parse("b.b|b.a", 2, &a).unwrap();
        let f = parse_qutl("G (a -> G !b)", &a).unwrap();
        assert!(brute_force_abstract(&q, &f, 2));
        let q = AbstractQueue::parse("a|a.b", 1, &a).unwrap();
        assert!(brute_force_abstract(&q, &parse_qutl("#a >= 3", &a).unwrap(), 3));
        assert!(!brute_force_abstract(&q, &parse_qutl("#a >= 5", &a).unwrap(), 1));
        let e = AbstractQueue::empty(1);
        assert_eq!(concretizations(&e, 3), vec![Vec::<EventId>::new()]);
    }

    #[test]
    fn block_sizes() {
        let a = Alphabet::from_names(["a", "b"]);
        let q = AbstractQueue::parse("|a.b", 0, &a).unwrap();
        // a{a}^{0..2} b{a,b}^{0..2}: 3 * 7
        assert_eq!(concretizations(&q, 2).len(), 21);
    }
}
