//! The iterative reasoning loop.
//!
//! Each iteration picks graph models (pool order for the heuristic strategy,
//! a learned policy for the agent strategy), matches them, applies the
//! expansion of a proving model or adds the equations of a property model,
//! then solves the equation set and copies new bindings back into the
//! hologram's attributes. The loop stops when the target is known, when an
//! iteration changes nothing, or when the step or time budget runs out.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equations::{render_binding, Equation, EquationSet};
use crate::expr::{format_number, Expr};
use crate::hologram::{EdgeKind, Hologram, HologramError, Target, VarId, VertexId, VertexKind};
use crate::matcher::{instantiate_equations, instantiate_relation, match_model, MatchOptions, MatchResult};
use crate::pool::{ExpansionOp, GraphModel, ModelKind, Pool};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    Heuristic,
    Agent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReasonerConfig {
    pub strategy: Strategy,
    pub max_steps: usize,
    pub budget: Duration,
    pub matching: MatchOptions,
    /// Model kinds excluded from selection.
    pub disabled: Vec<ModelKind>,
}

impl Default for ReasonerConfig {
    fn default() -> Self {
        ReasonerConfig {
            strategy: Strategy::Heuristic,
            max_steps: 50,
            budget: Duration::from_secs(30),
            matching: MatchOptions::default(),
            disabled: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    TargetSatisfied,
    BudgetExhausted,
    NoProgress,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepAction {
    Expansion { changes: Vec<String> },
    Equations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub model: String,
    pub mapping: Vec<(String, VertexId)>,
    pub action: StepAction,
    pub relation: String,
    /// Equations added after duplicate suppression, with known values shown.
    pub equations: Vec<String>,
    pub bindings: Vec<String>,
    pub changed: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub theorems: usize,
    pub relations: usize,
    pub equations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub problem_id: String,
    pub status: Status,
    pub answer: Option<f64>,
    pub choice: usize,
    pub target: String,
    pub trace: Vec<StepRecord>,
    pub counters: Counters,
    /// Calls to the matcher.
    pub attempts: usize,
    pub inconsistencies: usize,
}

/// Chooses the next model for the agent strategy. `allowed[i]` is false for
/// models that are disabled or already failed since the last state change.
pub trait Policy {
    fn choose(&self, session: &Session, allowed: &[bool]) -> Option<usize>;
}

/// Coarse fingerprint of the reasoning state; two equal summaries mean
/// nothing observable changed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub vertices: usize,
    pub edges: usize,
    pub known: usize,
    pub equations: usize,
    pub bound: usize,
}

/// Result of one model attempt.
#[derive(Clone, Debug)]
pub struct Attempt {
    pub matched: bool,
    pub changed: bool,
    pub elapsed: Duration,
}

/// One problem's reasoning state.
pub struct Session<'p> {
    pub pool: &'p Pool,
    pub config: ReasonerConfig,
    g: Hologram,
    eqs: EquationSet,
    trace: Vec<StepRecord>,
    attempts: usize,
    iterations: usize,
    started: Instant,
    diagnostics: Vec<String>,
}

impl<'p> Session<'p> {
    /// Seeds the equation set with the known attributes and the problem's
    /// equations, and solves once.
    pub fn new(g: Hologram, pool: &'p Pool, config: ReasonerConfig) -> Session<'p> {
        let mut eqs = EquationSet::new();
        for (v, x) in g.known_bindings() {
            eqs.bind(v, x);
        }
        eqs.add_equations(g.seeds.iter().cloned());
        let mut s = Session {
            pool,
            config,
            g,
            eqs,
            trace: Vec::new(),
            attempts: 0,
            iterations: 0,
            started: Instant::now(),
            diagnostics: Vec::new(),
        };
        s.solve();
        s
    }

    pub fn hologram(&self) -> &Hologram {
        &self.g
    }

    pub fn equations(&self) -> &EquationSet {
        &self.eqs
    }

    pub fn trace(&self) -> &[StepRecord] {
        &self.trace
    }

    pub fn attempts(&self) -> usize {
        self.attempts
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn target_value(&self) -> Option<f64> {
        check_target(&self.g, &self.eqs)
    }

    pub fn summary(&self) -> Summary {
        Summary {
            vertices: self.g.vertex_count(),
            edges: self.g.edge_count(),
            known: self.g.known_bindings().len(),
            equations: self.eqs.len(),
            bound: self.eqs.bindings().len(),
        }
    }

    fn out_of_budget(&self) -> bool {
        self.started.elapsed() >= self.config.budget
    }

    fn enabled(&self, m: &GraphModel) -> bool {
        !self.config.disabled.contains(&m.kind)
    }

    /// Models the agent may pick, given the models that failed since the last
    /// change.
    pub fn allowed(&self, failed: &BTreeSet<usize>) -> Vec<bool> {
        self.pool
            .models()
            .iter()
            .enumerate()
            .map(|(i, m)| self.enabled(m) && !failed.contains(&i))
            .collect()
    }

    fn solve(&mut self) -> Vec<String> {
        let new = self.eqs.solve(&self.g);
        let mut shown = Vec::new();
        for (v, x) in new {
            if let Some((vid, slot)) = self.g.slot_of(v) {
                if let Err(e) = self.g.resolve_attr(vid, slot, x) {
                    self.diagnostics.push(e.to_string());
                }
            }
            shown.push(render_binding(&self.g, v, x));
        }
        shown
    }

    /// Matches model `idx` and applies the result. Counts one attempt.
    pub fn try_model(&mut self, idx: usize) -> Attempt {
        let t0 = Instant::now();
        self.attempts += 1;
        let pool = self.pool;
        let model = &pool.models()[idx];
        if !self.enabled(model) {
            return Attempt { matched: false, changed: false, elapsed: t0.elapsed() };
        }
        let found = match_model(model, &self.g, &self.eqs, &self.config.matching, &mut self.diagnostics);
        let Some(m) = found else {
            return Attempt { matched: false, changed: false, elapsed: t0.elapsed() };
        };
        let changed = self.apply_match(model, m);
        Attempt { matched: true, changed, elapsed: t0.elapsed() }
    }

    fn apply_match(&mut self, model: &GraphModel, m: MatchResult) -> bool {
        let before = self.summary();
        let (action, equations) = match model.kind {
            ModelKind::Proving => match apply_expansion(&mut self.g, &mut self.eqs, model, &m.mapping) {
                Ok(changes) => (StepAction::Expansion { changes }, Vec::new()),
                Err(e) => {
                    self.diagnostics.push(format!("{}: {e}", model.name));
                    return false;
                }
            },
            ModelKind::Property => {
                let shown: Vec<(Equation, String)> =
                    m.equations.iter().map(|e| (e.clone(), self.display_equation(e))).collect();
                let mut added = Vec::new();
                for (e, text) in shown {
                    if self.eqs.add_equations([e]) == 1 {
                        added.push(text);
                    }
                }
                (StepAction::Equations, added)
            }
        };
        let bindings = self.solve();
        let changed = self.summary() != before;
        self.trace.push(StepRecord {
            step: self.trace.len() + 1,
            model: model.name.clone(),
            mapping: m.named,
            action,
            relation: m.relation,
            equations,
            bindings,
            changed,
        });
        changed
    }

    /// Equation text with already known attributes replaced by their values.
    fn display_equation(&self, e: &Equation) -> String {
        let g = &self.g;
        let eqs = &self.eqs;
        e.render(&|v| match g.var_value(v, eqs.bindings()) {
            Some(x) => format_number(x),
            None => g.var_name(v),
        })
    }

    /// One heuristic iteration: the first applicable proving model in pool
    /// order, then the first applicable property model.
    pub fn heuristic_iteration(&mut self) -> Option<bool> {
        let mut changed = false;
        for kind in [ModelKind::Proving, ModelKind::Property] {
            if self.config.disabled.contains(&kind) {
                continue;
            }
            let indices: Vec<usize> = self.pool.of_kind(kind).map(|(i, _)| i).collect();
            for i in indices {
                if self.out_of_budget() {
                    return None;
                }
                if self.try_model(i).matched {
                    changed = true;
                    break;
                }
            }
            if self.target_value().is_some() {
                return Some(true);
            }
        }
        Some(changed)
    }

    /// Runs the loop to completion.
    pub fn run(mut self, policy: Option<&dyn Policy>) -> (Status, Session<'p>) {
        let mut failed: BTreeSet<usize> = BTreeSet::new();
        loop {
            if self.target_value().is_some() {
                return (Status::TargetSatisfied, self);
            }
            if self.iterations >= self.config.max_steps || self.out_of_budget() {
                return (Status::BudgetExhausted, self);
            }
            self.iterations += 1;
            match (self.config.strategy, policy) {
                (Strategy::Agent, Some(policy)) => {
                    let allowed = self.allowed(&failed);
                    let Some(a) = policy.choose(&self, &allowed) else {
                        return (Status::NoProgress, self);
                    };
                    if self.try_model(a).changed {
                        failed.clear();
                    } else {
                        failed.insert(a);
                    }
                }
                _ => match self.heuristic_iteration() {
                    None => return (Status::BudgetExhausted, self),
                    Some(false) => return (Status::NoProgress, self),
                    Some(true) => {}
                },
            }
        }
    }

    pub fn counters(&self) -> Counters {
        counters(&self.trace)
    }
}

pub fn counters(trace: &[StepRecord]) -> Counters {
    Counters {
        theorems: trace.len(),
        relations: trace.iter().filter(|r| !r.relation.is_empty()).count(),
        equations: trace.iter().map(|r| r.equations.len()).sum(),
    }
}

/// Lines collinear with `l` (including `l`): all segments of its group are
/// sub-segments of the group's longest segment, so two Adjacent hops reach
/// them.
pub fn collinear_lines(g: &Hologram, l: VertexId) -> Vec<VertexId> {
    let line_nbrs = |x: VertexId| -> Vec<VertexId> {
        g.neighbors(x, Some(EdgeKind::Adjacent))
            .unwrap_or_default()
            .into_iter()
            .filter(|&y| g.vertex(y).map(|v| v.kind) == Some(VertexKind::Line))
            .collect()
    };
    let mut out: BTreeSet<VertexId> = BTreeSet::from([l]);
    for a in line_nbrs(l) {
        out.insert(a);
        out.extend(line_nbrs(a));
    }
    out.into_iter().collect()
}

/// Applies a proving model's expansion under `mapping` (indexed in pattern
/// order). Parallel and perpendicular edges between lines are extended to
/// every pair of collinear segments. Returns the changes made; empty when
/// every operation was a no-op.
pub fn apply_expansion(
    g: &mut Hologram,
    eqs: &mut EquationSet,
    model: &GraphModel,
    mapping: &[VertexId],
) -> Result<Vec<String>, HologramError> {
    let mut names: BTreeMap<String, VertexId> = model
        .pattern
        .vertices
        .iter()
        .zip(mapping)
        .map(|(p, &v)| (p.id.clone(), v))
        .collect();
    let get = |names: &BTreeMap<String, VertexId>, ph: &str| names.get(ph).copied().ok_or(HologramError::BadTarget);
    let mut changes = Vec::new();
    for op in &model.expansions {
        match op {
            ExpansionOp::AddEdge { u, v, kind } => {
                let (a, b) = (get(&names, u)?, get(&names, v)?);
                let lines = |x| g.vertex(x).map(|v| v.kind) == Some(VertexKind::Line);
                let pairs: Vec<(VertexId, VertexId)> =
                    if matches!(kind, EdgeKind::Parallel | EdgeKind::Perpendicular) && lines(a) && lines(b) {
                        let ga = collinear_lines(g, a);
                        let gb = collinear_lines(g, b);
                        ga.iter().flat_map(|&x| gb.iter().map(move |&y| (x, y))).collect()
                    } else {
                        vec![(a, b)]
                    };
                let mut fresh = false;
                for (x, y) in pairs {
                    if x != y {
                        fresh |= g.add_edge(x, y, *kind)?;
                    }
                }
                if fresh {
                    let la = g.vertex(a).map(|v| v.label()).unwrap_or_default();
                    let lb = g.vertex(b).map(|v| v.label()).unwrap_or_default();
                    changes.push(format!("add {kind:?} edge between {la} and {lb}"));
                }
            }
            ExpansionOp::AddVertex { id, kind, attach } => {
                let targets: Vec<(VertexId, EdgeKind)> =
                    attach.iter().map(|(ph, k)| Ok((get(&names, ph)?, *k))).collect::<Result<_, HologramError>>()?;
                let existing = g
                    .vertices()
                    .iter()
                    .filter(|v| v.kind == *kind)
                    .find(|v| targets.iter().all(|&(t, k)| g.has_edge(v.id, t, k)))
                    .map(|v| v.id);
                let vid = match existing {
                    Some(v) => v,
                    None => {
                        let v = g.add_vertex(*kind, format!("{}{}", id, g.vertex_count()), &[]);
                        for &(t, k) in &targets {
                            g.add_edge(v, t, k)?;
                        }
                        changes.push(format!("add {kind} vertex {}", g.vertex(v).map(|x| x.label()).unwrap_or_default()));
                        v
                    }
                };
                names.insert(id.clone(), vid);
            }
            ExpansionOp::SetAttr { target, slot, value } => {
                let t = get(&names, target)?;
                let x = eval_with(value, &names, g, eqs).ok_or(HologramError::BadTarget)?;
                if g.resolve_attr(t, *slot, x)? {
                    if let Some(var) = g.vertex(t).and_then(|v| v.var(*slot)) {
                        eqs.bind(var, x);
                        changes.push(render_binding(g, var, x));
                    }
                }
            }
        }
    }
    Ok(changes)
}

fn eval_with(e: &Expr, names: &BTreeMap<String, VertexId>, g: &Hologram, eqs: &EquationSet) -> Option<f64> {
    e.eval(&mut |leaf| match leaf {
        Expr::Const(c) => Some(*c),
        Expr::Attr(ph, slot) => {
            let v = g.vertex(*names.get(ph)?)?;
            v.value(*slot).or_else(|| eqs.value(v.var(*slot)?))
        }
        _ => None,
    })
}

/// The target's value if every variable it references is bound.
pub fn check_target(g: &Hologram, eqs: &EquationSet) -> Option<f64> {
    match g.target()? {
        Target::ValueOf { vertex, slot } => {
            let v = g.vertex(*vertex)?;
            v.value(*slot).or_else(|| eqs.value(v.var(*slot)?))
        }
        Target::ExpressionOf(e) => e.eval_vars(&|v| g.var_value(v, eqs.bindings())),
    }
}

/// Human-readable target description.
pub fn describe_target(g: &Hologram) -> String {
    match g.target() {
        Some(Target::ValueOf { vertex, slot }) => g
            .vertex(*vertex)
            .and_then(|v| v.var(*slot))
            .map(|var| g.var_name(var))
            .unwrap_or_default(),
        Some(Target::ExpressionOf(e)) => e.show(&|v| g.var_name(v)).to_string(),
        None => String::new(),
    }
}

/// Closest choice (lowest index on ties); a seeded pick when no value.
pub fn select_answer(value: Option<f64>, choices: &[f64; 4], seed: u64) -> usize {
    match value {
        Some(x) => {
            let mut best = 0;
            for i in 1..4 {
                if (choices[i] - x).abs() < (choices[best] - x).abs() {
                    best = i;
                }
            }
            best
        }
        None => ChaCha8Rng::seed_from_u64(seed).gen_range(0..4),
    }
}

/// Solves one hologram.
pub fn run(
    g: Hologram,
    problem_id: &str,
    choices: &[f64; 4],
    pool: &Pool,
    config: &ReasonerConfig,
    policy: Option<&dyn Policy>,
    seed: u64,
) -> SolveOutcome {
    let session = Session::new(g, pool, config.clone());
    let (status, session) = session.run(policy);
    let answer = session.target_value();
    SolveOutcome {
        problem_id: problem_id.to_string(),
        status,
        answer,
        choice: select_answer(answer, choices, seed),
        target: describe_target(session.hologram()),
        counters: session.counters(),
        attempts: session.attempts(),
        inconsistencies: session.equations().inconsistency_count(),
        trace: session.trace,
    }
}

/// Re-applies a recorded trace to a freshly built hologram and returns the
/// final bindings and target value.
pub fn replay(
    g: Hologram,
    pool: &Pool,
    trace: &[StepRecord],
) -> Result<(BTreeMap<VarId, f64>, Option<f64>), String> {
    let mut s = Session::new(g, pool, ReasonerConfig::default());
    for r in trace {
        let idx = pool.index_of(&r.model).ok_or_else(|| format!("unknown model {}", r.model))?;
        let model = &pool.models()[idx];
        let mapping: Vec<VertexId> = r.mapping.iter().map(|(_, v)| *v).collect();
        let m = MatchResult {
            model: model.name.clone(),
            mapping: mapping.clone(),
            named: r.mapping.clone(),
            relation: instantiate_relation(model, &mapping, &s.g),
            checks: Vec::new(),
            equations: match model.kind {
                ModelKind::Property => instantiate_equations(model, &mapping, &s.g),
                ModelKind::Proving => Vec::new(),
            },
        };
        s.apply_match(model, m);
    }
    let value = s.target_value();
    Ok((s.eqs.bindings().clone(), value))
}

/// Stable 64-bit FNV-1a hash, used to derive per-problem seeds.
pub fn stable_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hologram::Slot;

    #[test]
    fn select_answer_closest_and_ties() {
        let c = [100.0, 110.0, 120.0, 130.0];
        assert_eq!(select_answer(Some(110.0), &c, 0), 1);
        assert_eq!(select_answer(Some(114.9), &c, 0), 1);
        assert_eq!(select_answer(Some(115.0), &c, 0), 1);
        assert_eq!(select_answer(None, &c, 7), select_answer(None, &c, 7));
    }

    #[test]
    fn pre_satisfied_target() {
        let mut g = Hologram::new();
        let a = g.add_vertex(VertexKind::Angle, "ABC", &[(Slot::AngleMeasure, 110.0)]);
        g.set_target(Target::ValueOf { vertex: a, slot: Slot::AngleMeasure }).unwrap();
        let pool = Pool::builtin();
        let out = run(g, "p", &[100.0, 110.0, 120.0, 130.0], &pool, &ReasonerConfig::default(), None, 0);
        assert_eq!(out.status, Status::TargetSatisfied);
        assert_eq!(out.answer, Some(110.0));
        assert_eq!(out.counters, Counters::default());
        assert_eq!(out.choice, 1);
    }

    #[test]
    fn empty_pool_makes_no_progress() {
        let mut g = Hologram::new();
        let a = g.add_vertex(VertexKind::Angle, "ABC", &[]);
        g.set_target(Target::ValueOf { vertex: a, slot: Slot::AngleMeasure }).unwrap();
        let pool = Pool::default();
        let out = run(g, "p", &[1.0, 2.0, 3.0, 4.0], &pool, &ReasonerConfig::default(), None, 0);
        assert_eq!(out.status, Status::NoProgress);
        assert!(out.trace.is_empty());
    }
}
