use crate::abstraction::AbstractQueue;
use crate::model::EventId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LtsLabel {
    Events(Vec<EventId>),
    /// The final state, standing for the empty remainder.
    Epsilon,
}

/// Transition system whose complete paths spell the concretizations of an
/// abstract queue: each visited state contributes one event of its label.
#[derive(Clone, Debug)]
pub struct QueueLts {
    pub labels: Vec<LtsLabel>,
    pub edges: Vec<(usize, usize)>,
    pub start: usize,
    pub final_state: usize,
    succ: Vec<Vec<usize>>,
}

impl QueueLts {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn successors(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }

    pub fn has_self_loop(&self, s: usize) -> bool {
        self.succ[s].contains(&s)
    }
}

/// Builds the LTS of `q`: a chain for the prefix, then for every suffix
/// position a state for the first occurrence and a looping gap state for the
/// block that may follow it.
pub fn build_lts(q: &AbstractQueue) -> QueueLts {
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    // states whose outgoing edges lead to whatever state is created next
    let mut open: Vec<usize> = Vec::new();
    for e in &q.prefix {
        let s = labels.len();
        labels.push(LtsLabel::Events(vec![*e]));
        edges.extend(open.drain(..).map(|o| (o, s)));
        open.push(s);
    }
    for (i, e) in q.suffix.iter().enumerate() {
        let s = labels.len();
        labels.push(LtsLabel::Events(vec![*e]));
        let gap = labels.len();
        let mut block = q.suffix[..=i].to_vec();
        block.sort();
        labels.push(LtsLabel::Events(block));
        edges.extend(open.drain(..).map(|o| (o, s)));
        edges.push((s, gap));
        edges.push((gap, gap));
        open.push(s);
        open.push(gap);
    }
    let final_state = labels.len();
    labels.push(LtsLabel::Epsilon);
    edges.extend(open.drain(..).map(|o| (o, final_state)));
    let mut succ = vec![Vec::new(); labels.len()];
    for (a, b) in &edges {
        succ[*a].push(*b);
    }
    QueueLts {
        labels,
        edges,
        start: 0,
        final_state,
        succ,
    }
}
