//! Heterogeneous attributed graph holding the primitives, relations and
//! attributes of one problem. Pattern holograms in the model pool reuse
//! [`VertexKind`] and [`EdgeKind`] but carry no attributes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equations::Equation;
use crate::expr::Expr;

pub type VertexId = usize;

/// Identifier of an attribute (or free-symbol) variable; unique per hologram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VertexKind {
    Point,
    Line,
    Angle,
    Arc,
    Circle,
    Polygon(u8),
}

impl VertexKind {
    pub fn slots(self) -> &'static [Slot] {
        match self {
            VertexKind::Point => &[],
            VertexKind::Line => &[Slot::Length],
            VertexKind::Angle => &[Slot::AngleMeasure],
            VertexKind::Arc => &[Slot::ArcMeasure],
            VertexKind::Circle => &[Slot::Radius, Slot::Area, Slot::Perimeter],
            VertexKind::Polygon(_) => &[Slot::Area, Slot::Perimeter],
        }
    }

    pub fn has_slot(self, slot: Slot) -> bool {
        self.slots().contains(&slot)
    }

    /// Parses `Point`, `Line`, ..., `Triangle`, `Quad`, `Polygon5`.
    pub fn from_name(s: &str) -> Option<VertexKind> {
        Some(match s {
            "Point" => VertexKind::Point,
            "Line" => VertexKind::Line,
            "Angle" => VertexKind::Angle,
            "Arc" => VertexKind::Arc,
            "Circle" => VertexKind::Circle,
            "Triangle" => VertexKind::Polygon(3),
            "Quad" => VertexKind::Polygon(4),
            _ => {
                let n: u8 = s.strip_prefix("Polygon")?.parse().ok()?;
                if n < 3 {
                    return None;
                }
                VertexKind::Polygon(n)
            }
        })
    }

    pub fn name(self) -> String {
        match self {
            VertexKind::Point => "Point".into(),
            VertexKind::Line => "Line".into(),
            VertexKind::Angle => "Angle".into(),
            VertexKind::Arc => "Arc".into(),
            VertexKind::Circle => "Circle".into(),
            VertexKind::Polygon(3) => "Triangle".into(),
            VertexKind::Polygon(4) => "Quad".into(),
            VertexKind::Polygon(n) => format!("Polygon{n}"),
        }
    }

    /// Small integer label used by the plain-text graph export.
    pub fn label(self) -> u32 {
        match self {
            VertexKind::Point => 0,
            VertexKind::Line => 1,
            VertexKind::Angle => 2,
            VertexKind::Arc => 3,
            VertexKind::Circle => 4,
            VertexKind::Polygon(n) => 2 + n as u32,
        }
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Adjacent,
    Incident,
    Parallel,
    Perpendicular,
    Similar,
    Congruent,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 6] = [
        EdgeKind::Adjacent,
        EdgeKind::Incident,
        EdgeKind::Parallel,
        EdgeKind::Perpendicular,
        EdgeKind::Similar,
        EdgeKind::Congruent,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    Length,
    AngleMeasure,
    ArcMeasure,
    Radius,
    Area,
    Perimeter,
}

impl Slot {
    pub const ALL: [Slot; 6] = [
        Slot::Length,
        Slot::AngleMeasure,
        Slot::ArcMeasure,
        Slot::Radius,
        Slot::Area,
        Slot::Perimeter,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn dsl_name(self) -> &'static str {
        match self {
            Slot::Length => "length",
            Slot::AngleMeasure => "measure",
            Slot::ArcMeasure => "arc",
            Slot::Radius => "radius",
            Slot::Area => "area",
            Slot::Perimeter => "perimeter",
        }
    }

    pub fn from_dsl_name(s: &str) -> Option<Slot> {
        Some(match s {
            "length" => Slot::Length,
            "measure" => Slot::AngleMeasure,
            "arc" => Slot::ArcMeasure,
            "radius" => Slot::Radius,
            "area" => Slot::Area,
            "perimeter" => Slot::Perimeter,
            _ => return None,
        })
    }

    pub fn is_angular(self) -> bool {
        matches!(self, Slot::AngleMeasure | Slot::ArcMeasure)
    }

    /// Open interval of admissible values.
    pub fn domain(self) -> (f64, f64) {
        if self.is_angular() {
            (0.0, 360.0)
        } else {
            (0.0, 1e6)
        }
    }
}

/// A mathematical attribute: every slot owns a variable; `value` is set once
/// the slot is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MathAttr {
    pub var: VarId,
    pub value: Option<f64>,
}

/// Diagram-derived attributes. Never enter the equation set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VisualAttrs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<f64>,
    /// Line direction in degrees, in [0, 180).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub kind: VertexKind,
    pub name: String,
    /// Defining points: endpoints of a line, `[side, vertex, side]` of an
    /// angle, corners of a polygon, `[end, end, center]` of an arc, the
    /// center of a circle.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<String>,
    pub attrs: BTreeMap<Slot, MathAttr>,
    #[serde(default)]
    pub visual: VisualAttrs,
}

impl Vertex {
    pub fn value(&self, slot: Slot) -> Option<f64> {
        self.attrs.get(&slot).and_then(|a| a.value)
    }

    pub fn var(&self, slot: Slot) -> Option<VarId> {
        self.attrs.get(&slot).map(|a| a.var)
    }

    pub fn label(&self) -> String {
        match self.kind {
            VertexKind::Point => self.name.clone(),
            VertexKind::Line => self.name.clone(),
            VertexKind::Angle => format!("∠{}", self.name),
            VertexKind::Arc => format!("⌒{}", self.name),
            VertexKind::Circle => format!("⊙{}", self.name),
            VertexKind::Polygon(3) => format!("△{}", self.name),
            VertexKind::Polygon(_) => self.name.clone(),
        }
    }
}

/// What a variable stands for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VarOwner {
    Slot(VertexId, Slot),
    Symbol(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Target {
    ValueOf { vertex: VertexId, slot: Slot },
    ExpressionOf(Expr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub kind: EdgeKind,
}

impl Edge {
    fn canonical(u: VertexId, v: VertexId, kind: EdgeKind) -> Edge {
        Edge { a: u.min(v), b: u.max(v), kind }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HologramError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {vertex} ({kind}) has no {slot:?} slot")]
    MissingSlot { vertex: VertexId, kind: VertexKind, slot: Slot },
    #[error("conflicting value for {slot:?} of vertex {vertex}: known {known}, got {given}")]
    ConflictingValue { vertex: VertexId, slot: Slot, known: f64, given: f64 },
    #[error("value {value} outside the domain of {slot:?}")]
    OutOfDomain { slot: Slot, value: f64 },
    #[error("target references a missing vertex or slot")]
    BadTarget,
}

/// Absolute tolerance for attribute conflict detection.
pub const ATTR_EPS: f64 = 1e-6;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "HologramDoc", into = "HologramDoc")]
pub struct Hologram {
    vertices: Vec<Vertex>,
    edges: BTreeSet<Edge>,
    adjacency: Vec<BTreeSet<(VertexId, EdgeKind)>>,
    vars: Vec<VarOwner>,
    target: Option<Target>,
    /// Equations seeded from the problem literals.
    pub seeds: Vec<Equation>,
}

impl Hologram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.get(id)
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn vars(&self) -> &[VarOwner] {
        &self.vars
    }

    pub fn var_owner(&self, v: VarId) -> Option<&VarOwner> {
        self.vars.get(v.0 as usize)
    }

    pub fn target(&self) -> Option<&Target> {
        self.target.as_ref()
    }

    pub fn set_target(&mut self, t: Target) -> Result<(), HologramError> {
        if let Target::ValueOf { vertex, slot } = &t {
            let v = self.vertex(*vertex).ok_or(HologramError::BadTarget)?;
            if !v.kind.has_slot(*slot) {
                return Err(HologramError::BadTarget);
            }
        }
        self.target = Some(t);
        Ok(())
    }

    fn fresh_var(&mut self, owner: VarOwner) -> VarId {
        let id = VarId(self.vars.len() as u32);
        self.vars.push(owner);
        id
    }

    /// Registers a free symbol (e.g. `x` from a literal) and returns its var.
    pub fn add_symbol(&mut self, name: &str) -> VarId {
        if let Some(i) = self
            .vars
            .iter()
            .position(|o| matches!(o, VarOwner::Symbol(s) if s == name))
        {
            return VarId(i as u32);
        }
        self.fresh_var(VarOwner::Symbol(name.to_string()))
    }

    pub fn symbol(&self, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|o| matches!(o, VarOwner::Symbol(s) if s == name))
            .map(|i| VarId(i as u32))
    }

    /// Adds a vertex; every math slot of the kind gets a fresh variable and
    /// starts unknown unless listed in `known`.
    pub fn add_vertex(
        &mut self,
        kind: VertexKind,
        name: impl Into<String>,
        known: &[(Slot, f64)],
    ) -> VertexId {
        let id = self.vertices.len();
        let mut attrs = BTreeMap::new();
        for &slot in kind.slots() {
            let var = self.fresh_var(VarOwner::Slot(id, slot));
            let value = known.iter().find(|(s, _)| *s == slot).map(|(_, v)| *v);
            attrs.insert(slot, MathAttr { var, value });
        }
        self.vertices.push(Vertex {
            id,
            kind,
            name: name.into(),
            points: Vec::new(),
            attrs,
            visual: VisualAttrs::default(),
        });
        self.adjacency.push(BTreeSet::new());
        id
    }

    pub fn find(&self, kind: VertexKind, name: &str) -> Option<VertexId> {
        self.vertices
            .iter()
            .find(|v| v.kind == kind && v.name == name)
            .map(|v| v.id)
    }

    pub fn of_kind(&self, kind: VertexKind) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(move |v| v.kind == kind)
    }

    fn check(&self, v: VertexId) -> Result<(), HologramError> {
        if v < self.vertices.len() {
            Ok(())
        } else {
            Err(HologramError::UnknownVertex(v))
        }
    }

    /// Adds an undirected edge. Returns whether it was new.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId, kind: EdgeKind) -> Result<bool, HologramError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(HologramError::SelfLoop(u));
        }
        let fresh = self.edges.insert(Edge::canonical(u, v, kind));
        if fresh {
            self.adjacency[u].insert((v, kind));
            self.adjacency[v].insert((u, kind));
        }
        Ok(fresh)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId, kind: EdgeKind) -> bool {
        self.edges.contains(&Edge::canonical(u, v, kind))
    }

    /// Neighbours in ascending id order, optionally filtered by edge kind.
    pub fn neighbors(&self, v: VertexId, kind: Option<EdgeKind>) -> Result<Vec<VertexId>, HologramError> {
        self.check(v)?;
        let mut out: Vec<VertexId> = self.adjacency[v]
            .iter()
            .filter(|(_, k)| kind.is_none_or(|want| *k == want))
            .map(|(u, _)| *u)
            .collect();
        out.dedup();
        Ok(out)
    }

    /// Raw `(neighbour, kind)` pairs, ordered.
    pub fn incident(&self, v: VertexId) -> &BTreeSet<(VertexId, EdgeKind)> {
        &self.adjacency[v]
    }

    pub fn degree_by_kind(&self, v: VertexId) -> [usize; 6] {
        let mut out = [0; 6];
        for (_, k) in &self.adjacency[v] {
            out[k.index()] += 1;
        }
        out
    }

    /// Marks a slot known. Returns `true` if it was previously unknown.
    pub fn resolve_attr(&mut self, v: VertexId, slot: Slot, value: f64) -> Result<bool, HologramError> {
        self.check(v)?;
        let vertex = &mut self.vertices[v];
        let kind = vertex.kind;
        let attr = vertex
            .attrs
            .get_mut(&slot)
            .ok_or(HologramError::MissingSlot { vertex: v, kind, slot })?;
        if let Some(known) = attr.value {
            if (known - value).abs() > ATTR_EPS {
                return Err(HologramError::ConflictingValue { vertex: v, slot, known, given: value });
            }
            return Ok(false);
        }
        let (lo, hi) = slot.domain();
        if !(value > lo && value < hi) {
            return Err(HologramError::OutOfDomain { slot, value });
        }
        attr.value = Some(value);
        Ok(true)
    }

    /// Known values of all slot variables.
    pub fn known_bindings(&self) -> BTreeMap<VarId, f64> {
        self.vertices
            .iter()
            .flat_map(|v| v.attrs.values())
            .filter_map(|a| a.value.map(|x| (a.var, x)))
            .collect()
    }

    pub fn slot_of(&self, var: VarId) -> Option<(VertexId, Slot)> {
        match self.var_owner(var)? {
            VarOwner::Slot(v, s) => Some((*v, *s)),
            VarOwner::Symbol(_) => None,
        }
    }

    /// Value currently known for `var`, whether it is a slot or a symbol.
    pub fn var_value(&self, var: VarId, bindings: &BTreeMap<VarId, f64>) -> Option<f64> {
        if let Some(x) = bindings.get(&var) {
            return Some(*x);
        }
        let (v, s) = self.slot_of(var)?;
        self.vertices[v].value(s)
    }

    /// Human-readable name of a variable: `AB`, `∠ABC`, `x`.
    pub fn var_name(&self, var: VarId) -> String {
        match self.var_owner(var) {
            Some(VarOwner::Symbol(s)) => s.clone(),
            Some(VarOwner::Slot(v, slot)) => {
                let vx = &self.vertices[*v];
                match slot {
                    Slot::Length => vx.name.clone(),
                    Slot::AngleMeasure => format!("∠{}", vx.name),
                    Slot::ArcMeasure => format!("⌒{}", vx.name),
                    Slot::Radius => format!("r_{}", vx.name),
                    Slot::Area => format!("S_{}", vx.name),
                    Slot::Perimeter => format!("P_{}", vx.name),
                }
            }
            None => format!("v{}", var.0),
        }
    }

    /// Visual value hint for a slot variable, used to break ties between
    /// roots.
    pub fn visual_hint(&self, var: VarId) -> Option<f64> {
        let (v, slot) = self.slot_of(var)?;
        let vx = &self.vertices[v];
        match slot {
            Slot::Length => vx.visual.length,
            Slot::AngleMeasure | Slot::ArcMeasure => vx.visual.measure,
            _ => None,
        }
    }

    pub fn visual_mut(&mut self, v: VertexId) -> Option<&mut VisualAttrs> {
        self.vertices.get_mut(v).map(|x| &mut x.visual)
    }

    pub fn set_points(&mut self, v: VertexId, points: Vec<String>) {
        if let Some(x) = self.vertices.get_mut(v) {
            x.points = points;
        }
    }

    pub fn set_name(&mut self, v: VertexId, name: impl Into<String>) {
        if let Some(x) = self.vertices.get_mut(v) {
            x.name = name.into();
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hologram serializes")
    }

    pub fn from_json(s: &str) -> Result<Hologram, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Plain-text labelled graph (`.grf` style): vertex count, one
    /// `id label` line per vertex, then per vertex its edge count followed by
    /// `id neighbour label` lines. Each undirected edge appears in both
    /// directions.
    pub fn to_grf(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}\n", self.vertices.len()));
        for v in &self.vertices {
            out.push_str(&format!("{} {}\n", v.id, v.kind.label()));
        }
        for v in &self.vertices {
            let adj = &self.adjacency[v.id];
            out.push_str(&format!("{}\n", adj.len()));
            for (u, k) in adj {
                out.push_str(&format!("{} {} {}\n", v.id, u, k.index()));
            }
        }
        out
    }
}

/// Serialized layout: vertices, edges, target.
#[derive(Serialize, Deserialize)]
struct HologramDoc {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    #[serde(default)]
    vars: Vec<VarOwner>,
    #[serde(default)]
    target: Option<Target>,
    #[serde(default)]
    seeds: Vec<Equation>,
}

impl From<Hologram> for HologramDoc {
    fn from(h: Hologram) -> Self {
        HologramDoc {
            vertices: h.vertices,
            edges: h.edges.into_iter().collect(),
            vars: h.vars,
            target: h.target,
            seeds: h.seeds,
        }
    }
}

impl From<HologramDoc> for Hologram {
    fn from(d: HologramDoc) -> Self {
        let mut adjacency = vec![BTreeSet::new(); d.vertices.len()];
        let mut edges = BTreeSet::new();
        for e in d.edges {
            if e.a < adjacency.len() && e.b < adjacency.len() && e.a != e.b {
                let e = Edge::canonical(e.a, e.b, e.kind);
                edges.insert(e);
                adjacency[e.a].insert((e.b, e.kind));
                adjacency[e.b].insert((e.a, e.kind));
            }
        }
        Hologram {
            vertices: d.vertices,
            edges,
            adjacency,
            vars: d.vars,
            target: d.target,
            seeds: d.seeds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn add_vertex_assigns_fresh_slots() {
        let mut h = Hologram::new();
        let p = h.add_vertex(VertexKind::Point, "A", &[]);
        assert_eq!((h.vertex_count(), h.edge_count()), (1, 0));
        assert!(h.vertex(p).unwrap().attrs.is_empty());
        let l = h.add_vertex(VertexKind::Line, "AB", &[(Slot::Length, 4.0)]);
        assert_eq!(h.vertex(l).unwrap().value(Slot::Length), Some(4.0));
        let a = h.add_vertex(VertexKind::Angle, "BAC", &[]);
        let attr = &h.vertex(a).unwrap().attrs[&Slot::AngleMeasure];
        assert_eq!(attr.value, None);
        assert_ne!(attr.var, h.vertex(l).unwrap().attrs[&Slot::Length].var);
    }

    #[test]
    fn edges_are_symmetric_and_idempotent() {
        let mut h = Hologram::new();
        let p = h.add_vertex(VertexKind::Point, "A", &[]);
        let l = h.add_vertex(VertexKind::Line, "AB", &[]);
        assert!(h.add_edge(p, l, EdgeKind::Incident).unwrap());
        assert!(h.has_edge(l, p, EdgeKind::Incident));
        assert!(!h.add_edge(l, p, EdgeKind::Incident).unwrap());
        assert_eq!(h.edge_count(), 1);
        assert_eq!(h.add_edge(p, p, EdgeKind::Adjacent), Err(HologramError::SelfLoop(p)));
        assert_eq!(h.add_edge(p, 9, EdgeKind::Adjacent), Err(HologramError::UnknownVertex(9)));
    }

    #[test]
    fn neighbors_sorted_and_filtered() {
        let mut h = Hologram::new();
        let c = h.add_vertex(VertexKind::Line, "c", &[]);
        let leaves: Vec<_> = (0..4).map(|i| h.add_vertex(VertexKind::Point, format!("P{i}"), &[])).collect();
        for &l in leaves.iter().rev() {
            h.add_edge(c, l, EdgeKind::Incident).unwrap();
        }
        let lonely = h.add_vertex(VertexKind::Point, "Z", &[]);
        assert_eq!(h.neighbors(c, None).unwrap(), leaves);
        assert!(h.neighbors(lonely, None).unwrap().is_empty());
        assert!(h.neighbors(c, Some(EdgeKind::Parallel)).unwrap().is_empty());
    }

    #[test]
    fn multiple_kinds_between_one_pair() {
        let mut h = Hologram::new();
        let a = h.add_vertex(VertexKind::Line, "a", &[]);
        let b = h.add_vertex(VertexKind::Line, "b", &[]);
        h.add_edge(a, b, EdgeKind::Adjacent).unwrap();
        h.add_edge(a, b, EdgeKind::Parallel).unwrap();
        assert_eq!(h.edge_count(), 2);
        assert_eq!(h.neighbors(a, None).unwrap(), vec![b]);
    }

    #[test]
    fn resolve_attr_tolerance_and_conflict() {
        let mut h = Hologram::new();
        let a = h.add_vertex(VertexKind::Angle, "ABC", &[]);
        assert!(h.resolve_attr(a, Slot::AngleMeasure, 60.0).unwrap());
        assert_eq!(h.vertex(a).unwrap().value(Slot::AngleMeasure), Some(60.0));
        let l = h.add_vertex(VertexKind::Line, "AB", &[]);
        h.resolve_attr(l, Slot::Length, 5.0).unwrap();
        assert!(!h.resolve_attr(l, Slot::Length, 5.0000001).unwrap());
        assert_eq!(h.vertex(l).unwrap().value(Slot::Length), Some(5.0));
        assert!(matches!(
            h.resolve_attr(l, Slot::Length, 6.0),
            Err(HologramError::ConflictingValue { .. })
        ));
        assert!(matches!(
            h.resolve_attr(l, Slot::Area, 6.0),
            Err(HologramError::MissingSlot { .. })
        ));
    }

    #[test]
    fn grf_export_lists_both_directions() {
        let mut h = Hologram::new();
        let p = h.add_vertex(VertexKind::Point, "A", &[]);
        let l = h.add_vertex(VertexKind::Line, "AB", &[]);
        h.add_edge(p, l, EdgeKind::Incident).unwrap();
        assert_eq!(h.to_grf(), "2\n0 0\n1 1\n1\n0 1 1\n1\n1 0 1\n");
    }

    fn arb_hologram() -> impl Strategy<Value = Hologram> {
        let kinds = prop::sample::select(vec![
            VertexKind::Point,
            VertexKind::Line,
            VertexKind::Angle,
            VertexKind::Circle,
            VertexKind::Polygon(3),
        ]);
        (prop::collection::vec(kinds, 1..12), prop::collection::vec((0usize..12, 0usize..12, 0usize..6), 0..30))
            .prop_map(|(ks, es)| {
                let mut h = Hologram::new();
                for (i, k) in ks.iter().enumerate() {
                    h.add_vertex(*k, format!("v{i}"), &[]);
                }
                let n = ks.len();
                for (u, v, k) in es {
                    let _ = h.add_edge(u % n, v % n, EdgeKind::ALL[k]);
                }
                h
            })
    }

    proptest! {
        #[test]
        fn stored_edges_answer_reverse_queries(h in arb_hologram()) {
            for e in h.edges() {
                prop_assert!(h.has_edge(e.b, e.a, e.kind));
                prop_assert!(h.neighbors(e.b, Some(e.kind)).unwrap().contains(&e.a));
            }
        }

        #[test]
        fn json_round_trip(h in arb_hologram()) {
            let back = Hologram::from_json(&h.to_json()).unwrap();
            prop_assert_eq!(back, h);
        }
    }
}
