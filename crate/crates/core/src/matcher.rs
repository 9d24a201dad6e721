//! Pattern matching of graph models against a global hologram.
//!
//! Mappings are kind-preserving, edge-preserving injections of pattern
//! vertices into the hologram (monomorphisms: extra edges among the image are
//! allowed). The search assigns pattern vertices in declaration order, trying
//! candidates in ascending id order, and keeps a candidate domain for every
//! unassigned vertex that is narrowed each time a neighbor is assigned. That
//! makes the enumeration order lexicographic in the mapped-id tuple, so
//! stopping after `limit` results yields exactly the first `limit` mappings.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::equations::{Equation, EquationSet, Provenance};
use crate::expr::{Constraint, Expr, VisualRef};
use crate::hologram::{EdgeKind, Hologram, VertexId};
use crate::pool::{fill_template, ExpansionOp, GraphModel, ModelKind, PatternHologram};

pub const DEFAULT_MAPPING_LIMIT: usize = 64;

/// Image of each pattern vertex, indexed in pattern declaration order.
pub type Mapping = Vec<VertexId>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOptions {
    /// Distinct candidate effects examined per model per call.
    pub limit: usize,
    pub check_math: bool,
    pub check_visual: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions { limit: DEFAULT_MAPPING_LIMIT, check_math: true, check_visual: true }
    }
}

struct Compiled {
    /// Pattern neighbors of each vertex: (other index, kind).
    adj: Vec<Vec<(usize, EdgeKind)>>,
    /// Pattern degree of each vertex by edge kind.
    degree: Vec<[usize; 6]>,
}

fn compile(p: &PatternHologram) -> Compiled {
    let n = p.vertices.len();
    let mut adj = vec![Vec::new(); n];
    let mut degree = vec![[0usize; 6]; n];
    let mut seen = BTreeSet::new();
    for (u, v, k) in p.indexed_edges() {
        let key = (u.min(v), u.max(v), k);
        if !seen.insert(key) {
            continue;
        }
        adj[u].push((v, k));
        adj[v].push((u, k));
        degree[u][k.index()] += 1;
        degree[v][k.index()] += 1;
    }
    Compiled { adj, degree }
}

/// Streams every mapping of `p` into `g` in lexicographic order until the
/// visitor breaks.
pub fn for_each_mapping(
    p: &PatternHologram,
    g: &Hologram,
    visit: &mut dyn FnMut(&[VertexId]) -> ControlFlow<()>,
) {
    let n = p.vertices.len();
    if n == 0 || n > g.vertex_count() {
        return;
    }
    let c = compile(p);
    let mut domains: Vec<Vec<VertexId>> = Vec::with_capacity(n);
    for (i, pv) in p.vertices.iter().enumerate() {
        let d: Vec<VertexId> = g
            .vertices()
            .iter()
            .filter(|v| v.kind == pv.kind)
            .filter(|v| {
                let deg = g.degree_by_kind(v.id);
                (0..6).all(|k| deg[k] >= c.degree[i][k])
            })
            .map(|v| v.id)
            .collect();
        if d.is_empty() {
            return;
        }
        domains.push(d);
    }
    let mut assigned: Vec<VertexId> = Vec::with_capacity(n);
    let mut used = vec![false; g.vertex_count()];
    let _ = search(&c, g, &mut domains, &mut assigned, &mut used, visit);
}

fn search(
    c: &Compiled,
    g: &Hologram,
    domains: &mut Vec<Vec<VertexId>>,
    assigned: &mut Vec<VertexId>,
    used: &mut [bool],
    visit: &mut dyn FnMut(&[VertexId]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let i = assigned.len();
    if i == domains.len() {
        return visit(assigned);
    }
    let candidates = domains[i].clone();
    'cand: for x in candidates {
        if used[x] {
            continue;
        }
        // narrow the domains of later neighbors
        let mut saved: Vec<(usize, Vec<VertexId>)> = Vec::new();
        for &(j, k) in &c.adj[i] {
            if j < i {
                // forward checking already guarantees the edge
                debug_assert!(g.has_edge(x, assigned[j], k));
                continue;
            }
            if j == i {
                continue;
            }
            let narrowed: Vec<VertexId> = domains[j].iter().copied().filter(|&y| g.has_edge(x, y, k)).collect();
            let empty = narrowed.iter().all(|&y| used[y] || y == x);
            saved.push((j, std::mem::replace(&mut domains[j], narrowed)));
            if empty {
                for (j, d) in saved.into_iter().rev() {
                    domains[j] = d;
                }
                continue 'cand;
            }
        }
        used[x] = true;
        assigned.push(x);
        let flow = search(c, g, domains, assigned, used, visit);
        assigned.pop();
        used[x] = false;
        for (j, d) in saved.into_iter().rev() {
            domains[j] = d;
        }
        flow?;
    }
    ControlFlow::Continue(())
}

/// Up to `limit` mappings in lexicographic order.
pub fn find_mappings(p: &PatternHologram, g: &Hologram, limit: usize) -> Vec<Mapping> {
    let mut out = Vec::new();
    if limit == 0 {
        return out;
    }
    for_each_mapping(p, g, &mut |m| {
        out.push(m.to_vec());
        if out.len() >= limit {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    out
}

/// Reference enumeration: every injective kind-preserving map, filtered by
/// edge preservation. Exponential; for testing on small graphs.
pub fn brute_force_mappings(p: &PatternHologram, g: &Hologram) -> Vec<Mapping> {
    let n = p.vertices.len();
    let edges = p.indexed_edges();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = Vec::with_capacity(n);
    fn rec(
        p: &PatternHologram,
        g: &Hologram,
        edges: &[(usize, usize, EdgeKind)],
        cur: &mut Vec<VertexId>,
        out: &mut Vec<Mapping>,
    ) {
        if cur.len() == p.vertices.len() {
            if edges.iter().all(|&(u, v, k)| g.has_edge(cur[u], cur[v], k)) {
                out.push(cur.clone());
            }
            return;
        }
        let kind = p.vertices[cur.len()].kind;
        for v in g.vertices() {
            if v.kind == kind && !cur.contains(&v.id) {
                cur.push(v.id);
                rec(p, g, edges, cur, out);
                cur.pop();
            }
        }
    }
    rec(p, g, &edges, &mut cur, &mut out);
    out
}

fn resolve<'a>(p: &PatternHologram, m: &'a [VertexId], name: &str) -> Option<VertexId> {
    p.index_of(name).and_then(|i| m.get(i).copied())
}

/// Value of a mathematical-attribute leaf under a mapping.
fn math_leaf(p: &PatternHologram, m: &[VertexId], g: &Hologram, bindings: Option<&EquationSet>, e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        Expr::Attr(ph, slot) => {
            let v = g.vertex(resolve(p, m, ph)?)?;
            v.value(*slot).or_else(|| bindings.and_then(|b| b.value(v.var(*slot)?)))
        }
        _ => None,
    }
}

fn visual_leaf(p: &PatternHologram, m: &[VertexId], g: &Hologram, e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        Expr::Visual(VisualRef::Length(ph)) => g.vertex(resolve(p, m, ph)?)?.visual.length,
        Expr::Visual(VisualRef::Measure(ph)) => g.vertex(resolve(p, m, ph)?)?.visual.measure,
        Expr::Visual(VisualRef::LineAngle(a, b)) => {
            let da = g.vertex(resolve(p, m, a)?)?.visual.direction?;
            let db = g.vertex(resolve(p, m, b)?)?.visual.direction?;
            let d = (da - db).rem_euclid(180.0);
            Some(d.min(180.0 - d))
        }
        _ => None,
    }
}

/// Conjunction of mathematical constraints. A constraint that references an
/// unknown attribute is false.
pub fn verify_math(cs: &[Constraint], p: &PatternHologram, m: &[VertexId], g: &Hologram) -> bool {
    verify_math_with(cs, p, m, g, None)
}

fn verify_math_with(
    cs: &[Constraint],
    p: &PatternHologram,
    m: &[VertexId],
    g: &Hologram,
    bindings: Option<&EquationSet>,
) -> bool {
    cs.iter()
        .all(|c| c.check(&mut |e| math_leaf(p, m, g, bindings, e)) == Some(true))
}

/// Conjunction of visual constraints under their tolerances. A constraint
/// whose diagram value is missing is false and leaves a diagnostic.
pub fn verify_visual(
    cs: &[Constraint],
    p: &PatternHologram,
    m: &[VertexId],
    g: &Hologram,
    diagnostics: &mut Vec<String>,
) -> bool {
    let mut ok = true;
    for c in cs {
        match c.check(&mut |e| visual_leaf(p, m, g, e)) {
            Some(true) => {}
            Some(false) => ok = false,
            None => {
                diagnostics.push(format!("missing visual attribute in '{c}'"));
                ok = false;
            }
        }
        if !ok {
            break;
        }
    }
    ok
}

/// Replaces placeholder attribute references by the mapped vertices'
/// variables.
pub fn instantiate_expr(e: &Expr, p: &PatternHologram, m: &[VertexId], g: &Hologram) -> Option<Expr> {
    e.try_map_leaves(&mut |leaf| match leaf {
        Expr::Attr(ph, slot) => {
            let v = g.vertex(resolve(p, m, ph).ok_or(())?).ok_or(())?;
            v.var(*slot).map(Expr::Var).ok_or(())
        }
        other => Ok(other.clone()),
    })
    .ok()
}

/// The property model's equation templates with attributes replaced by the
/// mapped vertices' variables.
pub fn instantiate_equations(model: &GraphModel, m: &[VertexId], g: &Hologram) -> Vec<Equation> {
    let source = Provenance::Model { name: model.name.clone(), mapping: named_mapping(&model.pattern, m) };
    model
        .equations
        .iter()
        .filter_map(|t| {
            Some(Equation::new(
                instantiate_expr(&t.lhs, &model.pattern, m, g)?,
                instantiate_expr(&t.rhs, &model.pattern, m, g)?,
                source.clone(),
            ))
        })
        .collect()
}

pub fn named_mapping(p: &PatternHologram, m: &[VertexId]) -> Vec<(String, VertexId)> {
    p.vertices.iter().zip(m).map(|(pv, &v)| (pv.id.clone(), v)).collect()
}

/// Relation sentence with holes replaced by vertex labels.
pub fn instantiate_relation(model: &GraphModel, m: &[VertexId], g: &Hologram) -> String {
    fill_template(&model.relation_template, &|ph| {
        resolve(&model.pattern, m, ph)
            .and_then(|v| g.vertex(v))
            .map(|v| v.label())
            .unwrap_or_else(|| format!("{{{ph}}}"))
    })
}

/// What applying a proving model's expansion would do; `None` when it
/// cannot apply (unknown value or conflict).
pub fn expansion_effect(model: &GraphModel, m: &[VertexId], g: &Hologram) -> Option<Vec<String>> {
    let mut effect = Vec::new();
    for op in &model.expansions {
        match op {
            ExpansionOp::AddEdge { u, v, kind } => {
                let (a, b) = (resolve(&model.pattern, m, u)?, resolve(&model.pattern, m, v)?);
                if a == b {
                    return None;
                }
                if !g.has_edge(a, b, *kind) {
                    effect.push(format!("edge {}-{}:{kind:?}", a.min(b), a.max(b)));
                }
            }
            ExpansionOp::AddVertex { kind, attach, .. } => {
                let targets: Option<Vec<(VertexId, EdgeKind)>> = attach
                    .iter()
                    .map(|(ph, k)| Some((resolve(&model.pattern, m, ph)?, *k)))
                    .collect();
                let targets = targets?;
                let exists = g
                    .vertices()
                    .iter()
                    .filter(|v| v.kind == *kind)
                    .any(|v| targets.iter().all(|&(t, k)| g.has_edge(v.id, t, k)));
                if !exists {
                    effect.push(format!("vertex {kind} {targets:?}"));
                }
            }
            ExpansionOp::SetAttr { target, slot, value } => {
                let t = resolve(&model.pattern, m, target)?;
                let x = value.eval(&mut |e| math_leaf(&model.pattern, m, g, None, e))?;
                let (lo, hi) = slot.domain();
                if !(x > lo && x < hi) {
                    return None;
                }
                match g.vertex(t)?.value(*slot) {
                    Some(known) if (known - x).abs() <= crate::hologram::ATTR_EPS => {}
                    Some(_) => return None,
                    None => effect.push(format!("attr {t}:{slot:?}={x}")),
                }
            }
        }
    }
    Some(effect)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintOutcome {
    pub constraint: String,
    pub visual: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub model: String,
    pub mapping: Mapping,
    pub named: Vec<(String, VertexId)>,
    pub relation: String,
    pub checks: Vec<ConstraintOutcome>,
    /// Instantiated equations of a property model (empty for proving).
    pub equations: Vec<Equation>,
}

/// First mapping of `model` that passes every enabled verification and
/// would make progress: a proving model must change the hologram, a
/// property model must contribute an equation that is new and still has an
/// unknown. Mappings with identical effect count once against the limit.
pub fn match_model(
    model: &GraphModel,
    g: &Hologram,
    eqs: &EquationSet,
    opts: &MatchOptions,
    diagnostics: &mut Vec<String>,
) -> Option<MatchResult> {
    let p = &model.pattern;
    let mut effects_seen: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut found = None;
    for_each_mapping(p, g, &mut |m| {
        if opts.check_visual && !verify_visual(&model.visual_constraints, p, m, g, diagnostics) {
            return ControlFlow::Continue(());
        }
        if model.kind == ModelKind::Proving
            && opts.check_math
            && !verify_math_with(&model.math_constraints, p, m, g, Some(eqs))
        {
            return ControlFlow::Continue(());
        }
        let (effect, equations) = match model.kind {
            ModelKind::Proving => match expansion_effect(model, m, g) {
                Some(e) => (e, Vec::new()),
                None => return ControlFlow::Continue(()),
            },
            ModelKind::Property => {
                let equations = instantiate_equations(model, m, g);
                let mut keys: Vec<String> = equations.iter().map(|e| e.canonical_key()).collect();
                keys.sort();
                (keys, equations)
            }
        };
        if !effects_seen.insert(effect.clone()) {
            return ControlFlow::Continue(());
        }
        let progress = match model.kind {
            ModelKind::Proving => !effect.is_empty(),
            ModelKind::Property => equations.iter().any(|e| {
                !eqs.contains(e) && e.vars().iter().any(|&v| g.var_value(v, eqs.bindings()).is_none())
            }),
        };
        if progress {
            found = Some(MatchResult {
                model: model.name.clone(),
                mapping: m.to_vec(),
                named: named_mapping(p, m),
                relation: instantiate_relation(model, m, g),
                checks: constraint_report(model, m, g, eqs, opts),
                equations,
            });
            return ControlFlow::Break(());
        }
        if effects_seen.len() >= opts.limit {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    found
}

fn constraint_report(
    model: &GraphModel,
    m: &[VertexId],
    g: &Hologram,
    eqs: &EquationSet,
    opts: &MatchOptions,
) -> Vec<ConstraintOutcome> {
    let p = &model.pattern;
    let mut out = Vec::new();
    if opts.check_math && model.kind == ModelKind::Proving {
        for c in &model.math_constraints {
            let passed = verify_math_with(std::slice::from_ref(c), p, m, g, Some(eqs));
            out.push(ConstraintOutcome { constraint: c.to_string(), visual: false, passed });
        }
    }
    if opts.check_visual {
        for c in &model.visual_constraints {
            let passed = verify_visual(std::slice::from_ref(c), p, m, g, &mut Vec::new());
            out.push(ConstraintOutcome { constraint: c.to_string(), visual: true, passed });
        }
    }
    out
}
