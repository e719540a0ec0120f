//! Serializable run reports and their text rendering.

use std::fmt::Write as _;

use serde::Serialize;

use crate::driver::{InconclusiveReason, Verdict, VerifyOutcome};
use crate::explore::Trace;
use crate::invariants::InvariantStatus;
use crate::model::CqsModel;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub model: String,
    pub verdict: VerdictReport,
    pub rows: Vec<RowReport>,
    pub invariants: Vec<InvariantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spurious: Option<SpuriousReportOut>,
    pub metrics: Metrics,
    /// Wall-clock data; the only field that differs between identical runs.
    pub timing: Timing,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictReport {
    Safe { k: usize, p: usize, conditional_on: Vec<String> },
    Unsafe { k: usize, violation: String, trace: Vec<String> },
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct RowReport {
    pub p: usize,
    pub k: usize,
    pub concrete_states: usize,
    pub abstract_states: usize,
    pub transformer_ran: bool,
    pub novel: usize,
    pub filtered: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub machine: String,
    pub formula: String,
    #[serde(flatten)]
    pub status: StatusOut,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StatusOut {
    Trusted,
    Discharged { depth: usize },
    Failed { witness: String },
    Unknown { explored: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct SpuriousReportOut {
    pub p: usize,
    pub k: usize,
    pub states: Vec<SpuriousOut>,
    pub suggestions: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpuriousOut {
    pub state: String,
    pub source: String,
    pub machine: String,
    pub event: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub killed_by: Option<String>,
    pub nearest: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Metrics {
    pub max_concrete_states: usize,
    pub max_abstract_states: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

fn render_trace(trace: &Trace, model: &CqsModel) -> Vec<String> {
    let mut out = vec![trace.initial.render(model)];
    for s in &trace.steps {
        out.push(format!(
            "{}: {} -> {}",
            model.machines[s.machine].name,
            s.label.render(model),
            s.state.render(model)
        ));
    }
    out
}

impl RunReport {
    pub fn new(model_name: &str, model: &CqsModel, outcome: &VerifyOutcome, timing: Timing) -> Self {
        let inv_text = |i: usize| {
            let inv = &outcome.invariants[i];
            format!(
                "machine {}: {}",
                model.machines[inv.machine].name,
                inv.formula.display(&model.alphabet)
            )
        };
        let verdict = match &outcome.verdict {
            Verdict::Safe { k, p } => VerdictReport::Safe {
                k: *k,
                p: *p,
                conditional_on: (0..outcome.invariants.len())
                    .filter(|&i| outcome.invariants[i].status.is_usable())
                    .map(inv_text)
                    .collect(),
            },
            Verdict::Unsafe { k, violation, trace } => VerdictReport::Unsafe {
                k: *k,
                violation: violation.describe(model),
                trace: render_trace(trace, model),
            },
            Verdict::Inconclusive { reason } => VerdictReport::Inconclusive {
                reason: match reason {
                    InconclusiveReason::MaxK => "maximum queue bound reached".to_string(),
                    InconclusiveReason::Budget(b) => b.clone(),
                },
            },
        };
        let rows = outcome
            .rows
            .iter()
            .map(|r| RowReport {
                p: r.p,
                k: r.k,
                concrete_states: r.concrete,
                abstract_states: r.abstract_states,
                transformer_ran: r.transformer_ran,
                novel: r.novel,
                filtered: r.filtered,
            })
            .collect::<Vec<_>>();
        let invariants = outcome
            .invariants
            .iter()
            .map(|inv| InvariantReport {
                machine: model.machines[inv.machine].name.clone(),
                formula: inv.formula.display(&model.alphabet).to_string(),
                status: match &inv.status {
                    InvariantStatus::Trusted => StatusOut::Trusted,
                    InvariantStatus::Discharged { depth } => StatusOut::Discharged { depth: *depth },
                    InvariantStatus::Failed { witness } => StatusOut::Failed {
                        witness: model.alphabet.render_word(witness),
                    },
                    InvariantStatus::Unknown { explored } => StatusOut::Unknown { explored: *explored },
                },
            })
            .collect();
        let spurious = outcome.spurious.as_ref().map(|sp| SpuriousReportOut {
            p: sp.p,
            k: sp.k,
            states: sp
                .states
                .iter()
                .map(|s| SpuriousOut {
                    state: s.state.render(model),
                    source: s.witness.source.render(model),
                    machine: model.machines[s.witness.machine].name.clone(),
                    event: model.alphabet.name(s.witness.event).to_string(),
                    killed_by: s.killed_by.map(inv_text),
                    nearest: s.nearest.iter().map(|n| n.render(model)).collect(),
                })
                .collect(),
            suggestions: sp
                .suggestions
                .iter()
                .map(|(m, f)| format!("machine {}: {}", model.machines[*m].name, f.display(&model.alphabet)))
                .collect(),
        });
        let metrics = Metrics {
            max_concrete_states: rows.iter().map(|r| r.concrete_states).max().unwrap_or(0),
            max_abstract_states: rows.iter().map(|r| r.abstract_states).max().unwrap_or(0),
        };
        RunReport {
            schema_version: SCHEMA_VERSION,
            model: model_name.to_string(),
            verdict,
            rows,
            invariants,
            spurious,
            metrics,
            timing,
        }
    }

    /// Human-readable rendering. Spurious states are included only when
    /// `spurious` is set.
    pub fn to_text(&self, spurious: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model: {}", self.model);
        let _ = writeln!(out, "{:>3} {:>3} {:>10} {:>10}  {:<11} {:>6} {:>8}", "p", "k", "|R_k|", "|A_k|", "transformer", "novel", "filtered");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>3} {:>3} {:>10} {:>10}  {:<11} {:>6} {:>8}",
                r.p,
                r.k,
                r.concrete_states,
                r.abstract_states,
                if r.transformer_ran { "yes" } else { "-" },
                r.novel,
                r.filtered
            );
        }
        for inv in &self.invariants {
            let status = match &inv.status {
                StatusOut::Trusted => "trusted".to_string(),
                StatusOut::Discharged { depth } => format!("discharged up to queue length {depth}"),
                StatusOut::Failed { witness } => format!("FAILED, witness queue {witness}"),
                StatusOut::Unknown { explored } => format!("unknown, budget exhausted after {explored} states"),
            };
            let _ = writeln!(out, "invariant machine {}: {}  [{}]", inv.machine, inv.formula, status);
        }
        if spurious {
            if let Some(sp) = &self.spurious {
                let _ = writeln!(out, "novel abstract states at p={} k={}:", sp.p, sp.k);
                for s in &sp.states {
                    let _ = writeln!(out, "  {}", s.state);
                    let _ = writeln!(out, "    from {} ({} dequeues {})", s.source, s.machine, s.event);
                    match &s.killed_by {
                        Some(inv) => {
                            let _ = writeln!(out, "    removed by {inv}");
                        }
                        None => {
                            for n in &s.nearest {
                                let _ = writeln!(out, "    near {n}");
                            }
                        }
                    }
                }
                for sug in &sp.suggestions {
                    let _ = writeln!(out, "suggested invariant: {sug}");
                }
            }
        }
        match &self.verdict {
            VerdictReport::Safe { k, p, conditional_on } => {
                let _ = writeln!(out, "verdict: SAFE for every queue bound (K = {k}, p = {p})");
                for c in conditional_on {
                    let _ = writeln!(out, "  assuming {c}");
                }
            }
            VerdictReport::Unsafe { k, violation, trace } => {
                let _ = writeln!(out, "verdict: UNSAFE at queue bound {k}: {violation}");
                for (i, line) in trace.iter().enumerate() {
                    let _ = writeln!(out, "  {i:>3}. {line}");
                }
            }
            VerdictReport::Inconclusive { reason } => {
                let _ = writeln!(out, "verdict: INCONCLUSIVE ({reason})");
            }
        }
        out
    }
}
