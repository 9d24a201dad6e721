//! Human-readable and JSON renderings of a solve outcome.
//!
//! Both formats are produced from the same [`SolutionDocument`], so they
//! always agree on steps, theorem names, relations and equations.
//!
//! Text layout:
//!
//! ```text
//! problem: quad_01
//! target: BC
//!
//! step 1: co_interior_parallel
//!   relation: ...
//!   change: add Parallel edge between AD and BC
//!   equation: ...
//!   binding: BC = 5
//!
//! status: solved
//! answer: 5 (choice B)
//! T/R/E: 2/2/2
//! ```

use serde::{Deserialize, Serialize};

use crate::expr::format_number;
use crate::reasoner::{Counters, SolveOutcome, Status, StepAction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionStep {
    pub index: usize,
    pub theorem: String,
    pub relation: String,
    /// Graph changes of a proving model; empty for property models.
    pub changes: Vec<String>,
    pub equations: Vec<String>,
    pub bindings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub problem_id: String,
    pub target: String,
    pub status: Status,
    pub steps: Vec<SolutionStep>,
    pub answer: Option<f64>,
    pub choice: usize,
    pub counters: Counters,
}

impl SolutionDocument {
    pub fn from_outcome(o: &SolveOutcome) -> SolutionDocument {
        let steps = o
            .trace
            .iter()
            .enumerate()
            .map(|(i, r)| SolutionStep {
                index: i + 1,
                theorem: r.model.clone(),
                relation: r.relation.clone(),
                changes: match &r.action {
                    StepAction::Expansion { changes } => changes.clone(),
                    StepAction::Equations => Vec::new(),
                },
                equations: r.equations.clone(),
                bindings: r.bindings.clone(),
            })
            .collect();
        SolutionDocument {
            problem_id: o.problem_id.clone(),
            target: o.target.clone(),
            status: o.status,
            steps,
            answer: o.answer,
            choice: o.choice,
            counters: o.counters,
        }
    }
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::TargetSatisfied => "solved",
        Status::NoProgress => "no-progress",
        Status::BudgetExhausted => "budget-exhausted",
    }
}

pub fn choice_letter(i: usize) -> char {
    (b'A' + (i.min(25) as u8)) as char
}

pub fn render_text(o: &SolveOutcome) -> String {
    render_document(&SolutionDocument::from_outcome(o))
}

pub fn render_document(d: &SolutionDocument) -> String {
    let mut out = String::new();
    out.push_str(&format!("problem: {}\n", d.problem_id));
    out.push_str(&format!("target: {}\n", d.target));
    for s in &d.steps {
        out.push_str(&format!("\nstep {}: {}\n", s.index, s.theorem));
        if !s.relation.is_empty() {
            out.push_str(&format!("  relation: {}\n", s.relation));
        }
        for c in &s.changes {
            out.push_str(&format!("  change: {c}\n"));
        }
        for e in &s.equations {
            out.push_str(&format!("  equation: {e}\n"));
        }
        for b in &s.bindings {
            out.push_str(&format!("  binding: {b}\n"));
        }
    }
    out.push_str(&format!("\nstatus: {}\n", status_name(d.status)));
    match d.answer {
        Some(x) => out.push_str(&format!("answer: {} (choice {})\n", format_number(x), choice_letter(d.choice))),
        None => out.push_str(&format!("answer: unknown (fallback choice {})\n", choice_letter(d.choice))),
    }
    out.push_str(&format!(
        "T/R/E: {}/{}/{}\n",
        d.counters.theorems, d.counters.relations, d.counters.equations
    ));
    out
}

pub fn render_json(o: &SolveOutcome) -> String {
    serde_json::to_string_pretty(&SolutionDocument::from_outcome(o)).expect("document serializes")
}
