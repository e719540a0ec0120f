//! The list abstraction of queues.
//!
//! An abstract queue keeps the first `p` events of a queue exactly and, from
//! position `p` on, only the first occurrence of every event, in order. The
//! concretization of `e0..e(p-1) | ep..e(z-1)` is the regular language
//! `e0..e(p-1) ep{ep}* e(p+1){ep,e(p+1)}* .. e(z-1){ep..e(z-1)}*`.

use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

use crate::model::{Alphabet, CqsModel, EventId, GlobalState, LocalState};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractQueue {
    pub prefix: Vec<EventId>,
    /// Pairwise distinct; nonempty only when `prefix.len() == p`.
    pub suffix: Vec<EventId>,
    pub p: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AbstractQueueError {
    #[error("unknown event '{0}'")]
    UnknownEvent(String),
    #[error("prefix has {len} events but p is {p}")]
    PrefixTooLong { len: usize, p: usize },
    #[error("a nonempty suffix needs a prefix of exactly {p} events")]
    ShortPrefix { p: usize },
    #[error("event '{0}' occurs twice in the suffix")]
    RepeatedSuffixEvent(String),
}

impl AbstractQueue {
    pub fn empty(p: usize) -> Self {
        Self {
            prefix: Vec::new(),
            suffix: Vec::new(),
            p,
        }
    }

    /// Builds a queue after checking well-formedness.
    pub fn new(prefix: Vec<EventId>, suffix: Vec<EventId>, p: usize) -> Result<Self, AbstractQueueError> {
        if prefix.len() > p {
            return Err(AbstractQueueError::PrefixTooLong { len: prefix.len(), p });
        }
        if !suffix.is_empty() && prefix.len() != p {
            return Err(AbstractQueueError::ShortPrefix { p });
        }
        for (i, e) in suffix.iter().enumerate() {
            if suffix[..i].contains(e) {
                return Err(AbstractQueueError::RepeatedSuffixEvent(format!("#{}", e.index())));
            }
        }
        Ok(Self { prefix, suffix, p })
    }

    /// Parses `a.b|c.d`. Event names are separated by `.`; `ε` or nothing
    /// denotes an empty part, and a missing `|` means an empty suffix.
    pub fn parse(text: &str, p: usize, alphabet: &Alphabet) -> Result<Self, AbstractQueueError> {
        let word = |part: &str| -> Result<Vec<EventId>, AbstractQueueError> {
            let part = part.trim();
            if part.is_empty() || part == "ε" {
                return Ok(Vec::new());
            }
            part.split('.')
                .map(|n| {
                    let n = n.trim();
                    alphabet
                        .lookup(n)
                        .ok_or_else(|| AbstractQueueError::UnknownEvent(n.to_string()))
                })
                .collect()
        };
        let (pre, suf) = match text.split_once('|') {
            Some((a, b)) => (word(a)?, word(b)?),
            None => (word(text)?, Vec::new()),
        };
        if let Some(i) = (0..suf.len()).find(|&i| suf[..i].contains(&suf[i])) {
            return Err(AbstractQueueError::RepeatedSuffixEvent(alphabet.name(suf[i]).to_string()));
        }
        Self::new(pre, suf, p)
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.suffix.is_empty()
    }

    /// Number of listed events, `|prefix| + |suffix|`.
    pub fn len(&self) -> usize {
        self.prefix.len() + self.suffix.len()
    }

    /// The listed events, prefix then suffix.
    pub fn events(&self) -> Vec<EventId> {
        let mut v = self.prefix.clone();
        v.extend_from_slice(&self.suffix);
        v
    }

    pub fn head(&self) -> Option<EventId> {
        self.prefix.first().or(self.suffix.first()).copied()
    }

    pub fn is_well_formed(&self) -> bool {
        Self::new(self.prefix.clone(), self.suffix.clone(), self.p).is_ok()
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        let join = |w: &[EventId]| w.iter().map(|e| alphabet.name(*e)).collect::<Vec<_>>().join(".");
        if self.is_empty() {
            "ε".to_string()
        } else if self.suffix.is_empty() {
            join(&self.prefix)
        } else {
            format!("{}|{}", join(&self.prefix), join(&self.suffix))
        }
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        struct D<'a>(&'a AbstractQueue, &'a Alphabet);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0.render(self.1))
            }
        }
        D(self, alphabet)
    }
}

/// `α_p(Q)`.
pub fn alpha(queue: &[EventId], p: usize) -> AbstractQueue {
    let cut = p.min(queue.len());
    let mut suffix: Vec<EventId> = Vec::new();
    for e in &queue[cut..] {
        if !suffix.contains(e) {
            suffix.push(*e);
        }
    }
    AbstractQueue {
        prefix: queue[..cut].to_vec(),
        suffix,
        p,
    }
}

/// `Q ∈ γ_p(q̄)`, decided by abstraction equality.
pub fn gamma_contains(q: &AbstractQueue, queue: &[EventId]) -> bool {
    alpha(queue, q.p) == *q
}

/// `Q ∈ γ_p(q̄)`, decided by matching the concretization language block by
/// block. Kept as an independent route for cross-checking.
pub fn gamma_contains_direct(q: &AbstractQueue, queue: &[EventId]) -> bool {
    if queue.len() < q.prefix.len() || queue[..q.prefix.len()] != q.prefix[..] {
        return false;
    }
    if q.suffix.is_empty() {
        return queue.len() == q.prefix.len();
    }
    let mut rest = &queue[q.prefix.len()..];
    for (i, e) in q.suffix.iter().enumerate() {
        if rest.first() != Some(e) {
            return false;
        }
        rest = &rest[1..];
        let allowed = &q.suffix[..=i];
        let n = rest.iter().take_while(|x| allowed.contains(x)).count();
        rest = &rest[n..];
    }
    rest.is_empty()
}

/// Number of well-formed abstract queues over `sigma` events with prefix
/// parameter `p`.
pub fn count_abstract_queues(sigma: usize, p: usize) -> u128 {
    let s = sigma as u128;
    let short: u128 = (0..p as u32).map(|l| s.pow(l)).sum();
    let mut tails: u128 = 0;
    let mut falling: u128 = 1;
    for m in 0..=sigma as u128 {
        tails += falling;
        falling *= s - m;
    }
    short + s.pow(p as u32) * tails
}

/// Every well-formed abstract queue over events `0..sigma`.
pub fn all_abstract_queues(sigma: usize, p: usize) -> Vec<AbstractQueue> {
    let events: Vec<EventId> = (0..sigma as u8).map(EventId).collect();
    let mut prefixes: Vec<Vec<EventId>> = vec![Vec::new()];
    let mut out = Vec::new();
    for len in 0..=p {
        if len > 0 {
            prefixes = prefixes
                .iter()
                .flat_map(|w| {
                    events.iter().map(move |e| {
                        let mut v = w.clone();
                        v.push(*e);
                        v
                    })
                })
                .collect();
        }
        for pre in &prefixes {
            if len < p {
                out.push(AbstractQueue {
                    prefix: pre.clone(),
                    suffix: Vec::new(),
                    p,
                });
            } else {
                let mut suffixes = Vec::new();
                distinct_sequences(&events, &mut Vec::new(), &mut suffixes);
                for suf in suffixes {
                    out.push(AbstractQueue {
                        prefix: pre.clone(),
                        suffix: suf,
                        p,
                    });
                }
            }
        }
    }
    out
}

fn distinct_sequences(events: &[EventId], cur: &mut Vec<EventId>, out: &mut Vec<Vec<EventId>>) {
    out.push(cur.clone());
    for e in events {
        if !cur.contains(e) {
            cur.push(*e);
            distinct_sequences(events, cur, out);
            cur.pop();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractMachine {
    pub local: LocalState,
    pub queue: AbstractQueue,
}

/// A global state with every queue abstracted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractState(pub Vec<AbstractMachine>);

impl AbstractState {
    pub fn of(g: &GlobalState, p: usize) -> Self {
        AbstractState(
            g.0.iter()
                .map(|m| AbstractMachine {
                    local: m.local.clone(),
                    queue: alpha(m.queue.events(), p),
                })
                .collect(),
        )
    }

    pub fn render(&self, model: &CqsModel) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .zip(&model.machines)
            .map(|(m, def)| {
                format!(
                    "{}:{}[{}]",
                    def.name,
                    def.location_name(&m.local),
                    m.queue.render(&model.alphabet)
                )
            })
            .collect();
        format!("⟨{}⟩", parts.join(", "))
    }
}

/// `Ā_k = α_p(R_k)`, in first-seen order.
#[derive(Clone, Debug, Default)]
pub struct AbstractReachSet {
    pub states: IndexSet<AbstractState>,
    pub k: usize,
    pub p: usize,
}

impl AbstractReachSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, s: &AbstractState) -> bool {
        self.states.contains(s)
    }
}

/// Pointwise abstraction of a set of concrete states.
pub fn project<'a, I>(states: I, p: usize, k: usize) -> AbstractReachSet
where
    I: IntoIterator<Item = &'a GlobalState>,
{
    AbstractReachSet {
        states: states.into_iter().map(|g| AbstractState::of(g, p)).collect(),
        k,
        p,
    }
}
