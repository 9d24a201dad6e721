//! Turns a parsed problem into its global hologram.
//!
//! Construction rules:
//!
//! * Declared lines and `PointLiesOnLine` facts are merged into maximal
//!   collinear groups, ordered along the line by coordinates. Every pair of
//!   points in a group becomes a `Line` vertex, `Incident` to each point it
//!   spans and `Adjacent` to every longer segment containing it. Each
//!   multi-point segment gets one length-sum seed equation.
//! * At every point, each pair of non-collinear rays yields one `Angle`
//!   vertex, `Incident` to the vertex point and `Adjacent` to every segment
//!   leaving the vertex along either side. `Angle(A,B,C)` and `Angle(C,B,A)`
//!   and any angle naming a farther point on the same ray are the same vertex.
//! * Declared polygons plus every implied triangle (three pairwise-joined,
//!   non-collinear points) become `Polygon(n)` vertices `Adjacent` to their
//!   sides.
//! * A circle is `Adjacent` to its center point and `Incident` to the points
//!   on it; arcs are `Incident` to their endpoints and `Adjacent` to their
//!   circle; tangent lines are `Adjacent` to the circle.
//! * Equalities between two unknown lengths or two unknown angles also add a
//!   `Congruent` edge so that pattern models can see them.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::equations::Equation;
use crate::expr::{Expr, Func};
use crate::hologram::{EdgeKind, Hologram, HologramError, Slot, Target, VarOwner, VertexId, VertexKind};
use crate::literal::{ArithOp, Literal, ProblemInput, Term};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("missing coordinate for point '{0}'")]
    MissingCoordinate(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("unsupported literal: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Hologram(#[from] HologramError),
}

type Pt = (f64, f64);

fn dist(a: Pt, b: Pt) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Angle at `v` between the rays towards `a` and `b`, in degrees.
fn angle_at(v: Pt, a: Pt, b: Pt) -> Option<f64> {
    let (ux, uy) = (a.0 - v.0, a.1 - v.1);
    let (wx, wy) = (b.0 - v.0, b.1 - v.1);
    let nu = (ux * ux + uy * uy).sqrt();
    let nw = (wx * wx + wy * wy).sqrt();
    if nu < 1e-9 || nw < 1e-9 {
        return None;
    }
    let c = ((ux * wx + uy * wy) / (nu * nw)).clamp(-1.0, 1.0);
    Some(c.acos().to_degrees())
}

fn direction(a: Pt, b: Pt) -> f64 {
    let d = (b.1 - a.1).atan2(b.0 - a.0).to_degrees();
    d.rem_euclid(180.0)
}

fn canonical_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Rotation/reflection-normal form of a polygon's corner cycle.
fn canonical_cycle(corners: &[String]) -> Vec<String> {
    let n = corners.len();
    let mut best: Option<Vec<String>> = None;
    for start in 0..n {
        for dir in [1isize, -1] {
            let cyc: Vec<String> = (0..n)
                .map(|k| corners[((start as isize + dir * k as isize).rem_euclid(n as isize)) as usize].clone())
                .collect();
            if best.as_ref().is_none_or(|b| cyc < *b) {
                best = Some(cyc);
            }
        }
    }
    best.unwrap_or_default()
}

fn point_name(t: &Term) -> Result<String, BuildError> {
    t.as_ident()
        .map(str::to_string)
        .ok_or_else(|| BuildError::Unsupported(format!("expected a point name, got '{t}'")))
}

fn point_args(l: &Literal) -> Result<Vec<String>, BuildError> {
    l.args.iter().map(point_name).collect()
}

const POLYGON_PREDICATES: &[&str] = &[
    "Triangle",
    "Quadrilateral",
    "Parallelogram",
    "Rectangle",
    "Square",
    "Rhombus",
    "Trapezoid",
    "Kite",
    "Pentagon",
    "Hexagon",
    "Polygon",
];

/// Geometric facts gathered before any vertex is created.
#[derive(Default)]
struct Facts {
    points: BTreeSet<String>,
    segments: Vec<(String, String)>,
    on_line: Vec<(String, String, String)>,
    circles: BTreeSet<String>,
    on_circle: BTreeSet<(String, String)>,
    arcs: Vec<(String, String)>,
    polygons: Vec<Vec<String>>,
}

impl Facts {
    fn scan_literal(&mut self, l: &Literal) -> Result<(), BuildError> {
        match l.name.as_str() {
            "Point" => {
                self.points.insert(point_name(&l.args[0])?);
            }
            "Line" => {
                let p = point_args(l)?;
                self.segment(&p[0], &p[1])?;
            }
            "Angle" if l.args.len() == 3 => {
                let p = point_args(l)?;
                self.segment(&p[1], &p[0])?;
                self.segment(&p[1], &p[2])?;
            }
            "Angle" => {}
            "Circle" => {
                let c = point_name(&l.args[0])?;
                self.points.insert(c.clone());
                self.circles.insert(c);
            }
            "Arc" => {
                let p = point_args(l)?;
                self.points.extend(p.iter().cloned());
                self.arcs.push(canonical_pair(&p[0], &p[1]));
            }
            name if POLYGON_PREDICATES.contains(&name) => {
                let p = point_args(l)?;
                for i in 0..p.len() {
                    self.segment(&p[i], &p[(i + 1) % p.len()])?;
                }
                self.polygons.push(p);
            }
            "PointLiesOnLine" | "IsMidpointOf" => {
                let p = point_name(&l.args[0])?;
                let (a, b) = self.line_arg(&l.args[1])?;
                self.points.insert(p.clone());
                self.on_line.push((p, a, b));
            }
            "PointLiesOnCircle" => {
                let p = point_name(&l.args[0])?;
                let c = self.circle_arg(&l.args[1])?;
                self.points.insert(p.clone());
                self.on_circle.insert((p, c));
            }
            "IsDiameterOf" => {
                let (a, b) = self.line_arg(&l.args[0])?;
                let c = self.circle_arg(&l.args[1])?;
                self.on_line.push((c.clone(), a.clone(), b.clone()));
                self.on_circle.insert((a, c.clone()));
                self.on_circle.insert((b, c));
            }
            "IsRadiusOf" | "IsChordOf" => {
                let (a, b) = self.line_arg(&l.args[0])?;
                let c = self.circle_arg(&l.args[1])?;
                for p in [a, b] {
                    if p != c {
                        self.on_circle.insert((p, c.clone()));
                    }
                }
            }
            _ => {}
        }
        for a in &l.args {
            self.scan_term(a)?;
        }
        Ok(())
    }

    fn scan_term(&mut self, t: &Term) -> Result<(), BuildError> {
        match t {
            Term::Pred(l) => self.scan_literal(l),
            Term::Op(_, a, b) => {
                self.scan_term(a)?;
                self.scan_term(b)
            }
            Term::Neg(a) => self.scan_term(a),
            _ => Ok(()),
        }
    }

    fn segment(&mut self, a: &str, b: &str) -> Result<(), BuildError> {
        if a == b {
            return Err(BuildError::Degenerate(format!("segment {a}{b} has coincident endpoints")));
        }
        self.points.insert(a.to_string());
        self.points.insert(b.to_string());
        let pair = canonical_pair(a, b);
        if !self.segments.contains(&pair) {
            self.segments.push(pair);
        }
        Ok(())
    }

    fn line_arg(&mut self, t: &Term) -> Result<(String, String), BuildError> {
        match t.as_pred() {
            Some(l) if l.name == "Line" => {
                let p = point_args(l)?;
                self.segment(&p[0], &p[1])?;
                Ok((p[0].clone(), p[1].clone()))
            }
            _ => Err(BuildError::Unsupported(format!("expected Line(..), got '{t}'"))),
        }
    }

    fn circle_arg(&mut self, t: &Term) -> Result<String, BuildError> {
        match t.as_pred() {
            Some(l) if l.name == "Circle" => {
                let c = point_name(&l.args[0])?;
                self.points.insert(c.clone());
                self.circles.insert(c.clone());
                Ok(c)
            }
            _ => Err(BuildError::Unsupported(format!("expected Circle(..), got '{t}'"))),
        }
    }
}

/// A ray leaving a point along a collinear group: the points on it, nearest
/// first.
#[derive(Clone, Debug)]
struct Ray {
    group: usize,
    points: Vec<String>,
}

/// Name registries built alongside the hologram.
#[derive(Default)]
pub struct BuildContext {
    pub points: BTreeMap<String, VertexId>,
    pub lines: BTreeMap<(String, String), VertexId>,
    pub angles: BTreeMap<(String, usize, usize), VertexId>,
    pub angle_labels: BTreeMap<String, VertexId>,
    pub polygons: BTreeMap<Vec<String>, VertexId>,
    pub circles: BTreeMap<String, VertexId>,
    pub arcs: BTreeMap<(String, String), VertexId>,
    groups: Vec<Vec<String>>,
    group_lines: Vec<Vec<VertexId>>,
    rays: BTreeMap<String, Vec<Ray>>,
}

impl BuildContext {
    fn group_of(&self, a: &str, b: &str) -> Option<usize> {
        self.groups
            .iter()
            .position(|g| g.iter().any(|p| p == a) && g.iter().any(|p| p == b))
    }

    fn line(&self, a: &str, b: &str) -> Option<VertexId> {
        self.lines.get(&canonical_pair(a, b)).copied()
    }

    /// Index of the ray at `vertex` passing through `through`.
    fn ray_index(&self, vertex: &str, through: &str) -> Option<usize> {
        self.rays.get(vertex)?.iter().position(|r| r.points.iter().any(|p| p == through))
    }

    fn angle(&self, a: &str, b: &str, c: &str) -> Option<VertexId> {
        let r1 = self.ray_index(b, a)?;
        let r2 = self.ray_index(b, c)?;
        self.angles.get(&(b.to_string(), r1.min(r2), r1.max(r2))).copied()
    }
}

struct Builder<'a> {
    input: &'a ProblemInput,
    h: Hologram,
    ctx: BuildContext,
}

/// Builds the global hologram of a problem.
pub fn build(p: &ProblemInput) -> Result<Hologram, BuildError> {
    build_with_context(p).map(|(h, _)| h)
}

pub fn build_with_context(p: &ProblemInput) -> Result<(Hologram, BuildContext), BuildError> {
    let mut facts = Facts::default();
    for l in p.literals() {
        facts.scan_literal(l)?;
    }
    let mut b = Builder { input: p, h: Hologram::new(), ctx: BuildContext::default() };
    b.points(&facts)?;
    b.lines(&facts)?;
    b.angles()?;
    b.circles(&facts)?;
    b.polygons(&facts)?;
    b.register_angle_labels()?;
    for l in p.literals() {
        b.relation(l)?;
    }
    derive_visual_attrs(p, &mut b.h)?;
    Ok((b.h, b.ctx))
}

impl Builder<'_> {
    fn coord(&self, name: &str) -> Result<Pt, BuildError> {
        self.input
            .point_coords
            .get(name)
            .copied()
            .ok_or_else(|| BuildError::MissingCoordinate(name.to_string()))
    }

    fn points(&mut self, facts: &Facts) -> Result<(), BuildError> {
        for name in &facts.points {
            self.coord(name)?;
            let id = self.h.add_vertex(VertexKind::Point, name.clone(), &[]);
            self.h.set_points(id, vec![name.clone()]);
            self.ctx.points.insert(name.clone(), id);
        }
        Ok(())
    }

    fn lines(&mut self, facts: &Facts) -> Result<(), BuildError> {
        let mut groups: Vec<BTreeSet<String>> = facts
            .segments
            .iter()
            .map(|(a, b)| [a.clone(), b.clone()].into_iter().collect())
            .collect();
        for (p, a, b) in &facts.on_line {
            groups.push([p.clone(), a.clone(), b.clone()].into_iter().collect());
        }
        // merge groups sharing two points until stable
        loop {
            let mut merged = false;
            'outer: for i in 0..groups.len() {
                for j in i + 1..groups.len() {
                    if groups[i].intersection(&groups[j]).count() >= 2 {
                        let g = groups.remove(j);
                        groups[i].extend(g);
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                break;
            }
        }
        groups.sort();
        for g in groups {
            let ordered = self.order_group(&g)?;
            let gi = self.ctx.groups.len();
            let mut seg_ids = Vec::new();
            let n = ordered.len();
            let mut span: BTreeMap<(usize, usize), VertexId> = BTreeMap::new();
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = canonical_pair(&ordered[i], &ordered[j]);
                    let id = self.h.add_vertex(VertexKind::Line, format!("{a}{b}"), &[]);
                    self.h.set_points(id, vec![a.clone(), b.clone()]);
                    for p in &ordered[i..=j] {
                        self.h.add_edge(id, self.ctx.points[p], EdgeKind::Incident)?;
                    }
                    self.ctx.lines.insert((a, b), id);
                    span.insert((i, j), id);
                    seg_ids.push(id);
                }
            }
            for (&(i, j), &outer) in &span {
                for (&(k, l), &inner) in &span {
                    if (k, l) != (i, j) && k >= i && l <= j {
                        self.h.add_edge(inner, outer, EdgeKind::Adjacent)?;
                    }
                }
            }
            for i in 0..n {
                for j in i + 2..n {
                    let len = |x: usize, y: usize| {
                        Expr::var(self.h.vertex(span[&(x, y)]).unwrap().var(Slot::Length).unwrap())
                    };
                    let eq = Equation::seed(Expr::add(len(i, i + 1), len(i + 1, j)), len(i, j));
                    self.h.seeds.push(eq);
                }
            }
            self.ctx.groups.push(ordered);
            self.ctx.group_lines.push(seg_ids);
            let _ = gi;
        }
        // rays at every point
        for (gi, g) in self.ctx.groups.iter().enumerate() {
            for (i, p) in g.iter().enumerate() {
                let rays = self.ctx.rays.entry(p.clone()).or_default();
                if i > 0 {
                    rays.push(Ray { group: gi, points: g[..i].iter().rev().cloned().collect() });
                }
                if i + 1 < g.len() {
                    rays.push(Ray { group: gi, points: g[i + 1..].to_vec() });
                }
            }
        }
        Ok(())
    }

    fn order_group(&self, g: &BTreeSet<String>) -> Result<Vec<String>, BuildError> {
        let pts: Vec<(String, Pt)> = g
            .iter()
            .map(|n| Ok((n.clone(), self.coord(n)?)))
            .collect::<Result<_, BuildError>>()?;
        // direction of the farthest pair
        let mut best = (0.0, 0, 0);
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = dist(pts[i].1, pts[j].1);
                if d > best.0 {
                    best = (d, i, j);
                }
            }
        }
        let (len, i, j) = best;
        if len < 1e-9 {
            return Err(BuildError::Degenerate(format!("points {:?} coincide", g)));
        }
        let o = pts[i].1;
        let (dx, dy) = ((pts[j].1 .0 - o.0) / len, (pts[j].1 .1 - o.1) / len);
        let mut keyed: Vec<(f64, String)> = Vec::new();
        for (name, p) in &pts {
            let (rx, ry) = (p.0 - o.0, p.1 - o.1);
            let off = (rx * dy - ry * dx).abs();
            if off > 0.05 * len {
                return Err(BuildError::Inconsistent(format!(
                    "point {name} is declared on line {} but lies off it",
                    g.iter().cloned().collect::<String>()
                )));
            }
            keyed.push((rx * dx + ry * dy, name.clone()));
        }
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in keyed.windows(2) {
            if (w[1].0 - w[0].0).abs() < 1e-9 {
                return Err(BuildError::Degenerate(format!("points {} and {} coincide", w[0].1, w[1].1)));
            }
        }
        let mut names: Vec<String> = keyed.into_iter().map(|(_, n)| n).collect();
        if names.first() > names.last() {
            names.reverse();
        }
        Ok(names)
    }

    fn angles(&mut self) -> Result<(), BuildError> {
        let rays = self.ctx.rays.clone();
        for (p, rs) in &rays {
            let at = self.coord(p)?;
            for i in 0..rs.len() {
                for j in i + 1..rs.len() {
                    if rs[i].group == rs[j].group {
                        continue;
                    }
                    let (a, c) = (&rs[i].points[0], &rs[j].points[0]);
                    let Some(m) = angle_at(at, self.coord(a)?, self.coord(c)?) else { continue };
                    if !(0.01..=179.99).contains(&m) {
                        continue;
                    }
                    let (s1, s2) = canonical_pair(a, c);
                    let id = self.h.add_vertex(VertexKind::Angle, format!("{s1}{p}{s2}"), &[]);
                    self.h.set_points(id, vec![s1, p.clone(), s2]);
                    self.h.add_edge(id, self.ctx.points[p], EdgeKind::Incident)?;
                    for ray in [&rs[i], &rs[j]] {
                        for q in &ray.points {
                            let l = self.ctx.line(p, q).expect("segment exists for ray point");
                            self.h.add_edge(id, l, EdgeKind::Adjacent)?;
                        }
                    }
                    self.ctx.angles.insert((p.clone(), i, j), id);
                }
            }
        }
        Ok(())
    }

    fn circles(&mut self, facts: &Facts) -> Result<(), BuildError> {
        for c in &facts.circles {
            let id = self.h.add_vertex(VertexKind::Circle, c.clone(), &[]);
            self.h.set_points(id, vec![c.clone()]);
            self.h.add_edge(id, self.ctx.points[c], EdgeKind::Adjacent)?;
            self.ctx.circles.insert(c.clone(), id);
        }
        for (p, c) in &facts.on_circle {
            if p == c {
                return Err(BuildError::Inconsistent(format!("center {c} cannot lie on its circle")));
            }
            self.h.add_edge(self.ctx.circles[c], self.ctx.points[p], EdgeKind::Incident)?;
        }
        for (a, b) in &facts.arcs {
            let circle = facts
                .circles
                .iter()
                .find(|c| {
                    facts.on_circle.contains(&(a.clone(), (*c).clone()))
                        && facts.on_circle.contains(&(b.clone(), (*c).clone()))
                })
                .ok_or_else(|| BuildError::Inconsistent(format!("arc {a}{b} lies on no declared circle")))?
                .clone();
            if self.ctx.arcs.contains_key(&(a.clone(), b.clone())) {
                continue;
            }
            let id = self.h.add_vertex(VertexKind::Arc, format!("{a}{b}"), &[]);
            self.h.set_points(id, vec![a.clone(), b.clone(), circle.clone()]);
            self.h.add_edge(id, self.ctx.points[a], EdgeKind::Incident)?;
            self.h.add_edge(id, self.ctx.points[b], EdgeKind::Incident)?;
            self.h.add_edge(id, self.ctx.circles[&circle], EdgeKind::Adjacent)?;
            self.ctx.arcs.insert((a.clone(), b.clone()), id);
        }
        Ok(())
    }

    fn add_polygon(&mut self, corners: &[String]) -> Result<VertexId, BuildError> {
        let key = canonical_cycle(corners);
        if let Some(&id) = self.ctx.polygons.get(&key) {
            return Ok(id);
        }
        let n = key.len();
        let kind = VertexKind::Polygon(n as u8);
        let id = self.h.add_vertex(kind, key.concat(), &[]);
        self.h.set_points(id, key.clone());
        for i in 0..n {
            let side = self.ctx.line(&key[i], &key[(i + 1) % n]).expect("polygon side exists");
            self.h.add_edge(id, side, EdgeKind::Adjacent)?;
        }
        self.ctx.polygons.insert(key, id);
        Ok(id)
    }

    fn polygons(&mut self, facts: &Facts) -> Result<(), BuildError> {
        for corners in &facts.polygons {
            let n = corners.len();
            let distinct: BTreeSet<&String> = corners.iter().collect();
            if distinct.len() != n {
                return Err(BuildError::Degenerate(format!("polygon {corners:?} repeats a corner")));
            }
            for i in 0..n {
                let (a, b, c) = (&corners[(i + n - 1) % n], &corners[i], &corners[(i + 1) % n]);
                if self.ctx.angle(a, b, c).is_none() {
                    return Err(BuildError::Degenerate(format!("polygon corner {a}{b}{c} is flat")));
                }
            }
            self.add_polygon(corners)?;
        }
        // implied triangles
        let names: Vec<String> = self.ctx.points.keys().cloned().collect();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let Some(gij) = self.ctx.group_of(&names[i], &names[j]) else { continue };
                for k in j + 1..names.len() {
                    let (a, b, c) = (&names[i], &names[j], &names[k]);
                    let (Some(gjk), Some(gik)) = (self.ctx.group_of(b, c), self.ctx.group_of(a, c)) else {
                        continue;
                    };
                    if gij == gjk && gjk == gik {
                        continue;
                    }
                    if self.ctx.angle(a, b, c).is_none()
                        || self.ctx.angle(b, c, a).is_none()
                        || self.ctx.angle(c, a, b).is_none()
                    {
                        continue;
                    }
                    self.add_polygon(&[a.clone(), b.clone(), c.clone()])?;
                }
            }
        }
        Ok(())
    }

    fn register_angle_labels(&mut self) -> Result<(), BuildError> {
        for l in self.input.literals() {
            if l.name != "Equals" {
                continue;
            }
            let label = |t: &Term| -> Option<String> {
                let m = t.as_pred().filter(|m| m.name == "MeasureOf")?;
                let a = m.args[0].as_pred().filter(|a| a.name == "Angle" && a.args.len() == 1)?;
                Some(a.args[0].to_string())
            };
            fn named(t: &Term) -> Option<&Literal> {
                let m = t.as_pred().filter(|m| m.name == "MeasureOf")?;
                m.args[0].as_pred().filter(|a| a.name == "Angle" && a.args.len() == 3)
            }
            let pair = match (label(&l.args[0]), named(&l.args[1]), label(&l.args[1]), named(&l.args[0])) {
                (Some(lb), Some(a), _, _) | (_, _, Some(lb), Some(a)) => Some((lb, a)),
                _ => None,
            };
            if let Some((lb, a)) = pair {
                let id = self.angle_vertex(a)?;
                self.ctx.angle_labels.insert(lb, id);
            }
        }
        Ok(())
    }

    fn is_label_alias(&self, l: &Literal) -> bool {
        let is_label = |t: &Term| {
            t.as_pred()
                .filter(|m| m.name == "MeasureOf")
                .and_then(|m| m.args[0].as_pred())
                .is_some_and(|a| a.name == "Angle" && a.args.len() == 1)
        };
        l.name == "Equals" && (is_label(&l.args[0]) || is_label(&l.args[1])) && {
            let is_named = |t: &Term| {
                t.as_pred()
                    .filter(|m| m.name == "MeasureOf")
                    .and_then(|m| m.args[0].as_pred())
                    .is_some_and(|a| a.name == "Angle" && a.args.len() == 3)
            };
            is_named(&l.args[0]) || is_named(&l.args[1])
        }
    }

    fn angle_vertex(&self, a: &Literal) -> Result<VertexId, BuildError> {
        if a.args.len() == 1 {
            let key = a.args[0].to_string();
            return self
                .ctx
                .angle_labels
                .get(&key)
                .copied()
                .ok_or_else(|| BuildError::Inconsistent(format!("angle label {key} is never defined")));
        }
        let p = point_args(a)?;
        self.ctx
            .angle(&p[0], &p[1], &p[2])
            .ok_or_else(|| BuildError::Degenerate(format!("angle {}{}{} is flat or undefined", p[0], p[1], p[2])))
    }

    fn line_vertex(&self, l: &Literal) -> Result<VertexId, BuildError> {
        let p = point_args(l)?;
        self.ctx
            .line(&p[0], &p[1])
            .ok_or_else(|| BuildError::Inconsistent(format!("no line {}{}", p[0], p[1])))
    }

    fn group_lines(&self, l: &Literal) -> Result<Vec<VertexId>, BuildError> {
        let p = point_args(l)?;
        let g = self
            .ctx
            .group_of(&p[0], &p[1])
            .ok_or_else(|| BuildError::Inconsistent(format!("no line {}{}", p[0], p[1])))?;
        Ok(self.ctx.group_lines[g].clone())
    }

    fn shape_vertex(&self, t: &Term) -> Result<VertexId, BuildError> {
        let l = t
            .as_pred()
            .ok_or_else(|| BuildError::Unsupported(format!("expected a shape, got '{t}'")))?;
        match l.name.as_str() {
            "Circle" => {
                let c = point_name(&l.args[0])?;
                Ok(self.ctx.circles[&c])
            }
            name if POLYGON_PREDICATES.contains(&name) => {
                let key = canonical_cycle(&point_args(l)?);
                self.ctx
                    .polygons
                    .get(&key)
                    .copied()
                    .ok_or_else(|| BuildError::Inconsistent(format!("polygon {} is not drawn", key.concat())))
            }
            _ => Err(BuildError::Unsupported(format!("expected a shape, got '{t}'"))),
        }
    }

    fn sub_literal<'t>(&self, t: &'t Term, name: &str) -> Result<&'t Literal, BuildError> {
        t.as_pred()
            .filter(|l| l.name == name)
            .ok_or_else(|| BuildError::Unsupported(format!("expected {name}(..), got '{t}'")))
    }

    fn slot_var(&self, v: VertexId, slot: Slot) -> Result<Expr, BuildError> {
        let vx = self.h.vertex(v).expect("vertex exists");
        vx.var(slot)
            .map(Expr::var)
            .ok_or(BuildError::Hologram(HologramError::MissingSlot { vertex: v, kind: vx.kind, slot }))
    }

    /// Converts a literal term into an expression over hologram variables.
    fn expr(&mut self, t: &Term) -> Result<Expr, BuildError> {
        Ok(match t {
            Term::Num(x) => Expr::num(*x),
            Term::Ident(s) => Expr::var(self.h.add_symbol(s)),
            Term::Neg(a) => Expr::Neg(Box::new(self.expr(a)?)),
            Term::Op(op, a, b) => {
                let (a, b) = (self.expr(a)?, self.expr(b)?);
                match op {
                    ArithOp::Add => Expr::add(a, b),
                    ArithOp::Sub => Expr::sub(a, b),
                    ArithOp::Mul => Expr::mul(a, b),
                    ArithOp::Div => Expr::div(a, b),
                    ArithOp::Pow => Expr::pow(a, b),
                }
            }
            Term::Pred(l) => self.measure(l)?,
        })
    }

    fn measure(&mut self, l: &Literal) -> Result<Expr, BuildError> {
        let arg = &l.args[0];
        match l.name.as_str() {
            "LengthOf" => {
                let line = self.line_vertex(self.sub_literal(arg, "Line")?)?;
                self.slot_var(line, Slot::Length)
            }
            "MeasureOf" => {
                let inner = arg
                    .as_pred()
                    .ok_or_else(|| BuildError::Unsupported(format!("MeasureOf({arg})")))?;
                match inner.name.as_str() {
                    "Angle" => {
                        let a = self.angle_vertex(inner)?;
                        self.slot_var(a, Slot::AngleMeasure)
                    }
                    "Arc" => {
                        let p = point_args(inner)?;
                        let arc = self.ctx.arcs[&canonical_pair(&p[0], &p[1])];
                        self.slot_var(arc, Slot::ArcMeasure)
                    }
                    _ => Err(BuildError::Unsupported(format!("MeasureOf({arg})"))),
                }
            }
            "AreaOf" => {
                let s = self.shape_vertex(arg)?;
                self.slot_var(s, Slot::Area)
            }
            "PerimeterOf" | "CircumferenceOf" => {
                let s = self.shape_vertex(arg)?;
                self.slot_var(s, Slot::Perimeter)
            }
            "RadiusOf" => {
                let s = self.shape_vertex(arg)?;
                self.slot_var(s, Slot::Radius)
            }
            "DiameterOf" => {
                let s = self.shape_vertex(arg)?;
                Ok(Expr::mul(Expr::num(2.0), self.slot_var(s, Slot::Radius)?))
            }
            "RatioOf" | "Div" => Ok(Expr::div(self.expr(arg)?, self.expr(&l.args[1])?)),
            "Sub" => Ok(Expr::sub(self.expr(arg)?, self.expr(&l.args[1])?)),
            "HalfOf" => Ok(Expr::div(self.expr(arg)?, Expr::num(2.0))),
            "SqrtOf" => Ok(Expr::Call(Func::Sqrt, Box::new(self.expr(arg)?))),
            "SinOf" => Ok(Expr::Call(Func::Sin, Box::new(self.expr(arg)?))),
            "CosOf" => Ok(Expr::Call(Func::Cos, Box::new(self.expr(arg)?))),
            "TanOf" => Ok(Expr::Call(Func::Tan, Box::new(self.expr(arg)?))),
            "Add" | "Mul" => {
                let mut acc = self.expr(arg)?;
                for a in &l.args[1..] {
                    let e = self.expr(a)?;
                    acc = if l.name == "Add" { Expr::add(acc, e) } else { Expr::mul(acc, e) };
                }
                Ok(acc)
            }
            other => Err(BuildError::Unsupported(format!("'{other}' is not a measure"))),
        }
    }

    fn congruent_all(&mut self, ids: &[VertexId]) -> Result<(), BuildError> {
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                self.h.add_edge(ids[i], ids[j], EdgeKind::Congruent)?;
            }
        }
        Ok(())
    }

    fn relate_groups(&mut self, a: &Literal, b: &Literal, kind: EdgeKind) -> Result<(), BuildError> {
        let la = self.group_lines(a)?;
        let lb = self.group_lines(b)?;
        for &x in &la {
            for &y in &lb {
                if x == y {
                    return Err(BuildError::Inconsistent(format!("{a} cannot be {kind:?} to itself")));
                }
                self.h.add_edge(x, y, kind)?;
            }
        }
        Ok(())
    }

    fn sides(&self, corners: &[String]) -> Vec<VertexId> {
        let n = corners.len();
        (0..n)
            .map(|i| self.ctx.line(&corners[i], &corners[(i + 1) % n]).expect("side exists"))
            .collect()
    }

    fn corner_angles(&self, corners: &[String]) -> Vec<VertexId> {
        let n = corners.len();
        (0..n)
            .map(|i| {
                self.ctx
                    .angle(&corners[(i + n - 1) % n], &corners[i], &corners[(i + 1) % n])
                    .expect("corner exists")
            })
            .collect()
    }

    fn set_known(&mut self, v: VertexId, slot: Slot, x: f64) -> Result<(), BuildError> {
        match self.h.resolve_attr(v, slot, x) {
            Ok(_) => Ok(()),
            Err(HologramError::ConflictingValue { known, given, .. }) => Err(BuildError::Inconsistent(
                format!("{} given as both {known} and {given}", self.h.vertex(v).unwrap().label()),
            )),
            Err(e) => Err(e.into()),
        }
    }

    fn relation(&mut self, l: &Literal) -> Result<(), BuildError> {
        let pred = |i: usize| l.args[i].as_pred();
        match l.name.as_str() {
            "Parallel" | "Perpendicular" => {
                let kind = if l.name == "Parallel" { EdgeKind::Parallel } else { EdgeKind::Perpendicular };
                let a = self.sub_literal(&l.args[0], "Line")?;
                let b = self.sub_literal(&l.args[1], "Line")?;
                self.relate_groups(a, b, kind)?;
            }
            "Tangent" => {
                let a = self.sub_literal(&l.args[0], "Line")?;
                let c = self.shape_vertex(&l.args[1])?;
                for x in self.group_lines(a)? {
                    self.h.add_edge(x, c, EdgeKind::Adjacent)?;
                }
            }
            "Similar" | "Congruent" => {
                let kind = if l.name == "Similar" { EdgeKind::Similar } else { EdgeKind::Congruent };
                let (a, b) = (pred(0), pred(1));
                match (a, b) {
                    (Some(a), Some(b)) if a.name == "Line" && b.name == "Line" => {
                        let (x, y) = (self.line_vertex(a)?, self.line_vertex(b)?);
                        self.h.add_edge(x, y, kind)?;
                    }
                    (Some(a), Some(b)) if a.name == "Angle" && b.name == "Angle" => {
                        let (x, y) = (self.angle_vertex(a)?, self.angle_vertex(b)?);
                        self.h.add_edge(x, y, kind)?;
                    }
                    _ => {
                        let x = self.shape_vertex(&l.args[0])?;
                        let y = self.shape_vertex(&l.args[1])?;
                        self.h.add_edge(x, y, kind)?;
                    }
                }
            }
            "BisectsAngle" => {
                let bis = point_args(self.sub_literal(&l.args[0], "Line")?)?;
                let ang = point_args(self.sub_literal(&l.args[1], "Angle")?)?;
                let apex = &ang[1];
                let other = if &bis[0] == apex { &bis[1] } else { &bis[0] };
                let a1 = self.ctx.angle(&ang[0], apex, other);
                let a2 = self.ctx.angle(other, apex, &ang[2]);
                match (a1, a2) {
                    (Some(x), Some(y)) => {
                        self.h.add_edge(x, y, EdgeKind::Congruent)?;
                    }
                    _ => return Err(BuildError::Degenerate(format!("{l}"))),
                }
            }
            "IsMidpointOf" => {
                let m = point_name(&l.args[0])?;
                let ab = point_args(self.sub_literal(&l.args[1], "Line")?)?;
                let x = self.ctx.line(&ab[0], &m).expect("half exists");
                let y = self.ctx.line(&m, &ab[1]).expect("half exists");
                self.h.add_edge(x, y, EdgeKind::Congruent)?;
            }
            "Equilateral" => {
                let corners = point_args(self.sub_literal(&l.args[0], "Triangle")?)?;
                let sides = self.sides(&corners);
                let angles = self.corner_angles(&corners);
                self.congruent_all(&sides)?;
                for a in angles {
                    self.set_known(a, Slot::AngleMeasure, 60.0)?;
                }
            }
            "RightAngle" => {
                let a = self.angle_vertex(self.sub_literal(&l.args[0], "Angle")?)?;
                self.set_known(a, Slot::AngleMeasure, 90.0)?;
            }
            "Parallelogram" | "Rectangle" | "Square" | "Rhombus" => {
                let c = point_args(l)?;
                let s = self.sides(&c);
                let parallel = |b: &mut Self, i: usize, j: usize| -> Result<(), BuildError> {
                    let li = Literal::new("Line", vec![Term::Ident(c[i].clone()), Term::Ident(c[(i + 1) % 4].clone())]);
                    let lj = Literal::new("Line", vec![Term::Ident(c[j].clone()), Term::Ident(c[(j + 1) % 4].clone())]);
                    b.relate_groups(&li, &lj, EdgeKind::Parallel)
                };
                parallel(self, 0, 2)?;
                parallel(self, 1, 3)?;
                if matches!(l.name.as_str(), "Square" | "Rhombus") {
                    self.congruent_all(&s)?;
                }
                if matches!(l.name.as_str(), "Square" | "Rectangle") {
                    for a in self.corner_angles(&c) {
                        self.set_known(a, Slot::AngleMeasure, 90.0)?;
                    }
                }
            }
            "Equals" if !self.is_label_alias(l) => self.equals(l)?,
            "Find" => {
                let target = match pred(0) {
                    Some(m) if matches!(m.name.as_str(), "LengthOf" | "MeasureOf" | "AreaOf" | "PerimeterOf" | "CircumferenceOf" | "RadiusOf") => {
                        match self.measure(m)? {
                            Expr::Var(v) => {
                                let Some(VarOwner::Slot(vertex, slot)) = self.h.var_owner(v).cloned() else {
                                    unreachable!("measure yields slot vars")
                                };
                                Target::ValueOf { vertex, slot }
                            }
                            e => Target::ExpressionOf(e),
                        }
                    }
                    _ => Target::ExpressionOf(self.expr(&l.args[0])?),
                };
                self.h.set_target(target)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn equals(&mut self, l: &Literal) -> Result<(), BuildError> {
        let lhs = self.expr(&l.args[0])?;
        let rhs = self.expr(&l.args[1])?;
        let eq = Equation::seed(lhs, rhs);
        let vars = eq.vars();
        if vars.len() == 1 {
            if let Some((v, slot)) = self.h.slot_of(vars[0]) {
                if let Some(lf) = eq.difference().linearize(&|_| None) {
                    let k = lf.coeffs[&vars[0]];
                    let x = -lf.constant / k;
                    return self.set_known(v, slot, x);
                }
            }
        }
        if let (Expr::Var(a), Expr::Var(b)) = (&eq.lhs, &eq.rhs) {
            if let (Some((va, sa)), Some((vb, sb))) = (self.h.slot_of(*a), self.h.slot_of(*b)) {
                if sa == sb && matches!(sa, Slot::Length | Slot::AngleMeasure) && va != vb {
                    self.h.add_edge(va, vb, EdgeKind::Congruent)?;
                }
            }
        }
        self.h.seeds.push(eq);
        Ok(())
    }
}

/// Fills point positions, line lengths and directions, angle and arc
/// measures, and circle radii from the point coordinates.
pub fn derive_visual_attrs(p: &ProblemInput, h: &mut Hologram) -> Result<(), BuildError> {
    let coord = |n: &str| {
        p.point_coords
            .get(n)
            .copied()
            .ok_or_else(|| BuildError::MissingCoordinate(n.to_string()))
    };
    let mut degenerate = None;
    let ids: Vec<VertexId> = (0..h.vertex_count()).collect();
    for id in ids {
        let vx = h.vertex(id).expect("id in range").clone();
        let pts = &vx.points;
        let visual = h.visual_mut(id).expect("id in range");
        match vx.kind {
            VertexKind::Point => {
                let name = pts.first().unwrap_or(&vx.name);
                visual.position = Some(coord(name)?);
            }
            VertexKind::Line if pts.len() == 2 => {
                let (a, b) = (coord(&pts[0])?, coord(&pts[1])?);
                visual.length = Some(dist(a, b));
                visual.direction = Some(direction(a, b));
            }
            VertexKind::Angle if pts.len() == 3 => {
                let (a, v, c) = (coord(&pts[0])?, coord(&pts[1])?, coord(&pts[2])?);
                match angle_at(v, a, c) {
                    Some(m) => visual.measure = Some(m),
                    None => {
                        degenerate.get_or_insert(format!("angle {} has a zero-length side", vx.name));
                    }
                }
            }
            VertexKind::Arc if pts.len() == 3 => {
                let (a, b, o) = (coord(&pts[0])?, coord(&pts[1])?, coord(&pts[2])?);
                visual.measure = angle_at(o, a, b);
            }
            VertexKind::Circle => {
                let o = coord(&pts[0])?;
                let radii: Vec<f64> = h
                    .neighbors(id, Some(EdgeKind::Incident))?
                    .into_iter()
                    .filter_map(|q| h.vertex(q).and_then(|q| q.visual.position.or_else(|| coord(&q.name).ok())))
                    .map(|q| dist(o, q))
                    .collect();
                if !radii.is_empty() {
                    let r = radii.iter().sum::<f64>() / radii.len() as f64;
                    h.visual_mut(id).expect("id in range").length = Some(r);
                }
            }
            _ => {}
        }
    }
    match degenerate {
        Some(msg) => Err(BuildError::Degenerate(msg)),
        None => Ok(()),
    }
}
