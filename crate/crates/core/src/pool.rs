//! Declarative graph models and the model pool.
//!
//! A model is a small attribute-free pattern graph plus constraints and
//! actions, all stored as data. Expressions in constraints, expansions and
//! equation templates use the one DSL of [`crate::expr`]: `length(p)`,
//! `measure(p)`, `arc(p)`, `radius(p)`, `area(p)`, `perimeter(p)` read
//! mathematical attributes of placeholder `p`; `vlength`, `vmeasure` and
//! `vangle` read diagram-derived values.
//!
//! Pool file format (JSON array, one object per model):
//!
//! ```json
//! {
//!   "name": "co_interior_parallel",
//!   "kind": "Proving",
//!   "pattern": {
//!     "vertices": [{"id": "a1", "kind": "Angle"}, {"id": "t", "kind": "Line"}],
//!     "edges": [["a1", "t", "Adjacent"]]
//!   },
//!   "relation_template": "{l1} ∥ {l2}",
//!   "visual_constraints": ["vangle(l1, l2) = 0"],
//!   "math_constraints": ["measure(a1) + measure(a2) = 180"],
//!   "expansions": [{"op": "AddEdge", "u": "l1", "v": "l2", "kind": "Parallel"}],
//!   "equations": []
//! }
//! ```
//!
//! Expansion objects are `AddEdge {u, v, kind}`, `AddVertex {id, kind,
//! attach: [[placeholder, EdgeKind]]}` and `SetAttr {target, slot, value}`.
//! Equation templates are `"lhs = rhs"` strings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_constraint, parse_expr, CmpOp, Constraint, Expr, ExprError, VisualRef};
use crate::hologram::{EdgeKind, Slot, VertexKind};

/// Upper bound on pattern size.
pub const MAX_PATTERN_VERTICES: usize = 20;

const DEFAULT_POOL: &str = include_str!("../data/pool.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Proving,
    Property,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternVertex {
    pub id: String,
    #[serde(with = "kind_name")]
    pub kind: VertexKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternEdge(pub String, pub String, pub EdgeKind);

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternHologram {
    pub vertices: Vec<PatternVertex>,
    pub edges: Vec<PatternEdge>,
}

impl PatternHologram {
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn kind_of(&self, id: &str) -> Option<VertexKind> {
        self.index_of(id).map(|i| self.vertices[i].kind)
    }

    /// Edges as index triples; edges naming unknown placeholders are dropped.
    pub fn indexed_edges(&self) -> Vec<(usize, usize, EdgeKind)> {
        self.edges
            .iter()
            .filter_map(|PatternEdge(u, v, k)| Some((self.index_of(u)?, self.index_of(v)?, *k)))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return false;
        }
        let edges = self.indexed_edges();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &(u, v, _) in &edges {
                for (a, b) in [(u, v), (v, u)] {
                    if a == x && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum ExpansionOp {
    AddEdge {
        u: String,
        v: String,
        kind: EdgeKind,
    },
    AddVertex {
        id: String,
        #[serde(with = "kind_name")]
        kind: VertexKind,
        #[serde(default)]
        attach: Vec<(String, EdgeKind)>,
    },
    SetAttr {
        target: String,
        #[serde(with = "slot_name")]
        slot: Slot,
        #[serde(with = "expr_text")]
        value: Expr,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquationTemplate {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl fmt::Display for EquationTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub struct GraphModel {
    pub name: String,
    pub kind: ModelKind,
    pub pattern: PatternHologram,
    pub relation_template: String,
    pub visual_constraints: Vec<Constraint>,
    pub math_constraints: Vec<Constraint>,
    pub expansions: Vec<ExpansionOp>,
    pub equations: Vec<EquationTemplate>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub placeholder: Option<String>,
    pub detail: String,
}

impl Diagnostic {
    fn new(code: &str, placeholder: Option<&str>, detail: impl Into<String>) -> Self {
        Diagnostic { code: code.into(), placeholder: placeholder.map(str::to_string), detail: detail.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.placeholder {
            Some(p) => write!(f, "{} [{p}]: {}", self.code, self.detail),
            None => write!(f, "{}: {}", self.code, self.detail),
        }
    }
}

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("cannot read pool {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed pool file: {0}")]
    Syntax(String),
    #[error("invalid model '{model}': {}", .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Validation { model: String, diagnostics: Vec<Diagnostic> },
}

/// Checks one model; an empty list means well-formed.
pub fn validate_model(m: &GraphModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let p = &m.pattern;
    let mut ids = BTreeSet::new();
    for v in &p.vertices {
        if !ids.insert(v.id.as_str()) {
            out.push(Diagnostic::new("duplicate-placeholder", Some(&v.id), "placeholder declared twice"));
        }
    }
    if p.vertices.is_empty() {
        out.push(Diagnostic::new("empty-pattern", None, "pattern has no vertices"));
    }
    if p.vertices.len() > MAX_PATTERN_VERTICES {
        out.push(Diagnostic::new(
            "too-many-vertices",
            None,
            format!("{} vertices, limit {MAX_PATTERN_VERTICES}", p.vertices.len()),
        ));
    }
    for PatternEdge(u, v, _) in &p.edges {
        for x in [u, v] {
            if p.index_of(x).is_none() {
                out.push(Diagnostic::new("unknown-placeholder", Some(x), "edge endpoint not in pattern"));
            }
        }
        if u == v {
            out.push(Diagnostic::new("self-loop", Some(u), "pattern edge joins a placeholder to itself"));
        }
    }
    if !p.vertices.is_empty() && !p.is_connected() {
        out.push(Diagnostic::new("disconnected", None, "pattern graph is not connected"));
    }

    // placeholders introduced by AddVertex are visible to later ops
    let mut kinds: BTreeMap<String, VertexKind> = p.vertices.iter().map(|v| (v.id.clone(), v.kind)).collect();
    for c in &m.math_constraints {
        check_expr_refs(&c.lhs, &kinds, false, &mut out);
        check_expr_refs(&c.rhs, &kinds, false, &mut out);
    }
    for c in &m.visual_constraints {
        check_expr_refs(&c.lhs, &kinds, true, &mut out);
        check_expr_refs(&c.rhs, &kinds, true, &mut out);
    }
    for op in &m.expansions {
        match op {
            ExpansionOp::AddEdge { u, v, .. } => {
                for x in [u, v] {
                    if !kinds.contains_key(x) {
                        out.push(Diagnostic::new("unknown-placeholder", Some(x), "expansion edge endpoint"));
                    }
                }
            }
            ExpansionOp::AddVertex { id, kind, attach } => {
                for (x, _) in attach {
                    if !kinds.contains_key(x) {
                        out.push(Diagnostic::new("unknown-placeholder", Some(x), "attach target"));
                    }
                }
                if kinds.insert(id.clone(), *kind).is_some() {
                    out.push(Diagnostic::new("duplicate-placeholder", Some(id), "AddVertex reuses a placeholder"));
                }
            }
            ExpansionOp::SetAttr { target, slot, value } => {
                match kinds.get(target) {
                    None => out.push(Diagnostic::new("unknown-placeholder", Some(target), "SetAttr target")),
                    Some(k) if !k.has_slot(*slot) => out.push(Diagnostic::new(
                        "slot-kind-mismatch",
                        Some(target),
                        format!("{k} has no {} slot", slot.dsl_name()),
                    )),
                    _ => {}
                }
                check_expr_refs(value, &kinds, false, &mut out);
            }
        }
    }
    for e in &m.equations {
        check_expr_refs(&e.lhs, &kinds, false, &mut out);
        check_expr_refs(&e.rhs, &kinds, false, &mut out);
    }
    for hole in template_holes(&m.relation_template) {
        if !kinds.contains_key(&hole) {
            out.push(Diagnostic::new("unknown-placeholder", Some(&hole), "relation template hole"));
        }
    }
    match m.kind {
        ModelKind::Proving => {
            if m.expansions.is_empty() {
                out.push(Diagnostic::new("missing-expansions", None, "proving model has no expansion"));
            }
            if !m.equations.is_empty() {
                out.push(Diagnostic::new("unexpected-equations", None, "proving models do not emit equations"));
            }
        }
        ModelKind::Property => {
            if m.equations.is_empty() {
                out.push(Diagnostic::new("missing-equations", None, "property model has no equation"));
            }
            if !m.expansions.is_empty() || !m.math_constraints.is_empty() {
                out.push(Diagnostic::new(
                    "unexpected-expansions",
                    None,
                    "property models carry neither expansions nor math constraints",
                ));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn check_expr_refs(e: &Expr, kinds: &BTreeMap<String, VertexKind>, visual_ok: bool, out: &mut Vec<Diagnostic>) {
    fn need(
        kinds: &BTreeMap<String, VertexKind>,
        p: &str,
        ok: &dyn Fn(VertexKind) -> bool,
        what: &str,
        out: &mut Vec<Diagnostic>,
    ) {
        match kinds.get(p) {
            None => out.push(Diagnostic::new("unknown-placeholder", Some(p), "expression reference")),
            Some(k) if !ok(*k) => out.push(Diagnostic::new("slot-kind-mismatch", Some(p), format!("{k} has no {what}"))),
            _ => {}
        }
    }
    e.visit_leaves(&mut |leaf| match leaf {
        Expr::Attr(p, slot) => {
            let slot = *slot;
            need(kinds, p, &|k| k.has_slot(slot), slot.dsl_name(), out);
        }
        Expr::Visual(r) => {
            if !visual_ok {
                out.push(Diagnostic::new(
                    "visual-in-math",
                    r_placeholder(r),
                    "diagram values may only appear in visual constraints",
                ));
            }
            match r {
                VisualRef::Length(p) => {
                    need(kinds, p, &|k| matches!(k, VertexKind::Line | VertexKind::Circle), "visual length", out)
                }
                VisualRef::Measure(p) => {
                    need(kinds, p, &|k| matches!(k, VertexKind::Angle | VertexKind::Arc), "visual measure", out)
                }
                VisualRef::LineAngle(a, b) => {
                    need(kinds, a, &|k| k == VertexKind::Line, "direction", out);
                    need(kinds, b, &|k| k == VertexKind::Line, "direction", out);
                }
            }
        }
        Expr::Sym(s) => out.push(Diagnostic::new("unknown-symbol", Some(s), "free symbols are not allowed in models")),
        _ => {}
    });
}

fn r_placeholder(r: &VisualRef) -> Option<&str> {
    match r {
        VisualRef::Length(p) | VisualRef::Measure(p) | VisualRef::LineAngle(p, _) => Some(p),
    }
}

/// Names inside `{...}` holes of a relation template.
pub fn template_holes(t: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = t;
    while let Some(i) = rest.find('{') {
        let after = &rest[i + 1..];
        match after.find('}') {
            Some(j) => {
                out.push(after[..j].to_string());
                rest = &after[j + 1..];
            }
            None => break,
        }
    }
    out
}

/// Fills template holes with `name(placeholder)`.
pub fn fill_template(t: &str, name: &dyn Fn(&str) -> String) -> String {
    let mut out = String::new();
    let mut rest = t;
    while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        let after = &rest[i + 1..];
        match after.find('}') {
            Some(j) => {
                out.push_str(&name(&after[..j]));
                rest = &after[j + 1..];
            }
            None => {
                out.push_str(&rest[i..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// Rewrites `measure(p)` to `arc(p)` where `p` is an Arc placeholder.
fn normalize_slots(e: &Expr, kinds: &BTreeMap<String, VertexKind>) -> Expr {
    e.map_leaves(&mut |leaf| match leaf {
        Expr::Attr(p, Slot::AngleMeasure) if kinds.get(p) == Some(&VertexKind::Arc) => {
            Expr::Attr(p.clone(), Slot::ArcMeasure)
        }
        other => other.clone(),
    })
}

fn normalize_constraint(c: Constraint, kinds: &BTreeMap<String, VertexKind>) -> Constraint {
    Constraint { lhs: normalize_slots(&c.lhs, kinds), rhs: normalize_slots(&c.rhs, kinds), ..c }
}

pub fn parse_equation_template(s: &str) -> Result<EquationTemplate, ExprError> {
    let c = parse_constraint(s)?;
    if c.op != CmpOp::Eq || c.tolerance.is_some() {
        return Err(ExprError { pos: 0, msg: "equation templates must be plain 'lhs = rhs'".into() });
    }
    Ok(EquationTemplate { lhs: c.lhs, rhs: c.rhs })
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    name: String,
    kind: ModelKind,
    pattern: PatternHologram,
    #[serde(default)]
    relation_template: String,
    #[serde(default)]
    visual_constraints: Vec<String>,
    #[serde(default)]
    math_constraints: Vec<String>,
    #[serde(default)]
    expansions: Vec<ExpansionOp>,
    #[serde(default)]
    equations: Vec<String>,
}

impl TryFrom<ModelDoc> for GraphModel {
    type Error = String;

    fn try_from(d: ModelDoc) -> Result<Self, String> {
        let kinds: BTreeMap<String, VertexKind> =
            d.pattern.vertices.iter().map(|v| (v.id.clone(), v.kind)).collect();
        let ctx = |what: &str, s: &str, e: ExprError| format!("model '{}': {what} '{s}': {e}", d.name);
        let constraints = |list: &[String], what: &str| -> Result<Vec<Constraint>, String> {
            list.iter()
                .map(|s| parse_constraint(s).map(|c| normalize_constraint(c, &kinds)).map_err(|e| ctx(what, s, e)))
                .collect()
        };
        let visual_constraints = constraints(&d.visual_constraints, "visual constraint")?;
        let math_constraints = constraints(&d.math_constraints, "math constraint")?;
        let equations = d
            .equations
            .iter()
            .map(|s| {
                parse_equation_template(s)
                    .map(|t| EquationTemplate { lhs: normalize_slots(&t.lhs, &kinds), rhs: normalize_slots(&t.rhs, &kinds) })
                    .map_err(|e| ctx("equation", s, e))
            })
            .collect::<Result<_, _>>()?;
        let expansions = d
            .expansions
            .into_iter()
            .map(|op| match op {
                ExpansionOp::SetAttr { target, slot, value } => {
                    let slot = if slot == Slot::AngleMeasure && kinds.get(&target) == Some(&VertexKind::Arc) {
                        Slot::ArcMeasure
                    } else {
                        slot
                    };
                    ExpansionOp::SetAttr { target, slot, value: normalize_slots(&value, &kinds) }
                }
                other => other,
            })
            .collect();
        Ok(GraphModel {
            name: d.name,
            kind: d.kind,
            pattern: d.pattern,
            relation_template: d.relation_template,
            visual_constraints,
            math_constraints,
            expansions,
            equations,
        })
    }
}

impl From<GraphModel> for ModelDoc {
    fn from(m: GraphModel) -> Self {
        ModelDoc {
            name: m.name,
            kind: m.kind,
            pattern: m.pattern,
            relation_template: m.relation_template,
            visual_constraints: m.visual_constraints.iter().map(|c| c.to_string()).collect(),
            math_constraints: m.math_constraints.iter().map(|c| c.to_string()).collect(),
            expansions: m.expansions,
            equations: m.equations.iter().map(|e| e.to_string()).collect(),
        }
    }
}

/// An immutable, validated list of models in file order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pool {
    models: Vec<GraphModel>,
}

impl Pool {
    /// Validates every model; all failures are reported together.
    pub fn new(models: Vec<GraphModel>) -> Result<Pool, Vec<PoolError>> {
        let errors: Vec<PoolError> = models
            .iter()
            .filter_map(|m| {
                let d = validate_model(m);
                (!d.is_empty()).then(|| PoolError::Validation { model: m.name.clone(), diagnostics: d })
            })
            .collect();
        if errors.is_empty() {
            Ok(Pool { models })
        } else {
            Err(errors)
        }
    }

    /// The pool shipped with the crate.
    pub fn builtin() -> Pool {
        parse_pool(DEFAULT_POOL).expect("built-in pool is valid")
    }

    pub fn models(&self) -> &[GraphModel] {
        &self.models
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&GraphModel> {
        self.models.get(i)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.models.iter().position(|m| m.name == name)
    }

    pub fn of_kind(&self, kind: ModelKind) -> impl Iterator<Item = (usize, &GraphModel)> {
        self.models.iter().enumerate().filter(move |(_, m)| m.kind == kind)
    }

    /// Keeps models for which `keep` holds, preserving order.
    pub fn filtered(&self, keep: impl Fn(&GraphModel) -> bool) -> Pool {
        Pool { models: self.models.iter().filter(|m| keep(m)).cloned().collect() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.models).expect("pool serializes")
    }
}

/// Parses a pool document without validating it.
pub fn parse_models(json: &str) -> Result<Vec<GraphModel>, PoolError> {
    serde_json::from_str(json).map_err(|e| PoolError::Syntax(e.to_string()))
}

pub fn parse_pool(json: &str) -> Result<Pool, PoolError> {
    Pool::new(parse_models(json)?).map_err(|mut errs| errs.remove(0))
}

pub fn load_pool(path: &Path) -> Result<Pool, PoolError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| PoolError::Io { path: path.display().to_string(), source })?;
    parse_pool(&text)
}

pub fn save_pool(pool: &Pool, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, pool.to_json())
}

mod kind_name {
    use super::VertexKind;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(k: &VertexKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&k.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<VertexKind, D::Error> {
        let s = String::deserialize(d)?;
        VertexKind::from_name(&s).ok_or_else(|| D::Error::custom(format!("unknown vertex kind '{s}'")))
    }
}

mod slot_name {
    use super::Slot;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(k: &Slot, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(k.dsl_name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Slot, D::Error> {
        let s = String::deserialize(d)?;
        Slot::from_dsl_name(&s).ok_or_else(|| D::Error::custom(format!("unknown slot '{s}'")))
    }
}

mod expr_text {
    use super::{parse_expr, Expr};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&e.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let s = String::deserialize(d)?;
        parse_expr(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(json: &str) -> GraphModel {
        serde_json::from_str(json).unwrap()
    }

    const PARALLELOGRAM: &str = r#"{
        "name": "pgram", "kind": "Property",
        "pattern": {"vertices": [{"id":"q","kind":"Quad"},{"id":"s1","kind":"Line"},{"id":"s2","kind":"Line"},{"id":"s3","kind":"Line"},{"id":"s4","kind":"Line"}],
                    "edges": [["q","s1","Adjacent"],["q","s2","Adjacent"],["q","s3","Adjacent"],["q","s4","Adjacent"],["s1","s3","Parallel"],["s2","s4","Parallel"]]},
        "relation_template": "{s1} = {s3}",
        "equations": ["length(s1) = length(s3)", "length(s2) = length(s4)"]
    }"#;

    #[test]
    fn well_formed_model_has_no_diagnostics() {
        assert!(validate_model(&model(PARALLELOGRAM)).is_empty());
    }

    #[test]
    fn measure_of_a_point_is_a_kind_mismatch() {
        let mut m = model(PARALLELOGRAM);
        m.pattern.vertices.push(PatternVertex { id: "p".into(), kind: VertexKind::Point });
        m.pattern.edges.push(PatternEdge("p".into(), "s1".into(), EdgeKind::Incident));
        m.equations.push(parse_equation_template("measure(p) = 90").unwrap());
        let d = validate_model(&m);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "slot-kind-mismatch");
        assert_eq!(d[0].placeholder.as_deref(), Some("p"));
    }

    #[test]
    fn unknown_template_hole() {
        let mut m = model(PARALLELOGRAM);
        m.relation_template = "{z} is odd".into();
        let d = validate_model(&m);
        assert_eq!(d[0].code, "unknown-placeholder");
        assert_eq!(d[0].placeholder.as_deref(), Some("z"));
    }

    #[test]
    fn disconnected_pattern_rejected() {
        let mut m = model(PARALLELOGRAM);
        m.pattern.vertices.push(PatternVertex { id: "x".into(), kind: VertexKind::Point });
        assert!(validate_model(&m).iter().any(|d| d.code == "disconnected"));
        let err = Pool::new(vec![m]).unwrap_err();
        assert!(matches!(&err[0], PoolError::Validation { model, .. } if model == "pgram"));
    }

    #[test]
    fn kind_specific_requirements() {
        let mut m = model(PARALLELOGRAM);
        m.equations.clear();
        assert!(validate_model(&m).iter().any(|d| d.code == "missing-equations"));
        m.kind = ModelKind::Proving;
        assert!(validate_model(&m).iter().any(|d| d.code == "missing-expansions"));
    }

    #[test]
    fn measure_of_arc_normalizes() {
        let m = model(
            r#"{"name":"a","kind":"Property",
                "pattern":{"vertices":[{"id":"x","kind":"Arc"},{"id":"c","kind":"Circle"}],"edges":[["x","c","Adjacent"]]},
                "equations":["measure(x) = 2 * radius(c)"]}"#,
        );
        assert_eq!(m.equations[0].lhs, Expr::Attr("x".into(), Slot::ArcMeasure));
        assert!(validate_model(&m).is_empty());
    }

    #[test]
    fn templates_fill() {
        assert_eq!(template_holes("{a} ∥ {b}"), vec!["a", "b"]);
        assert_eq!(fill_template("{a} ∥ {b}!", &|p| p.to_uppercase()), "A ∥ B!");
    }

    #[test]
    fn builtin_pool_round_trips() {
        let pool = Pool::builtin();
        assert!(!pool.is_empty());
        let again = parse_pool(&pool.to_json()).unwrap();
        assert_eq!(pool, again);
    }
}
