//! Accumulated equation set and the fixpoint solver that binds attribute
//! variables.
//!
//! Solving iterates three passes until nothing new is bound: substitute the
//! current bindings, solve the subsystem that is linear in its remaining
//! unknowns by Gauss-Jordan elimination, then solve single-unknown nonlinear
//! equations numerically (grid scan, bisection, Newton polish). There is no
//! multivariate nonlinear solving; equations the loop cannot crack stay in the
//! frontier until later steps bind more variables.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{format_number, BinOp, Expr};
use crate::hologram::{Hologram, VarId, VarOwner, VertexId};

/// Residual above which a fully bound equation counts as contradicted.
pub const RESIDUAL_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Seed,
    Model { name: String, mapping: Vec<(String, VertexId)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub lhs: Expr,
    pub rhs: Expr,
    pub source: Provenance,
}

impl Equation {
    pub fn new(lhs: Expr, rhs: Expr, source: Provenance) -> Self {
        Equation { lhs, rhs, source }
    }

    pub fn seed(lhs: Expr, rhs: Expr) -> Self {
        Self::new(lhs, rhs, Provenance::Seed)
    }

    /// `lhs - rhs`.
    pub fn difference(&self) -> Expr {
        Expr::sub(self.lhs.clone(), self.rhs.clone())
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut out = self.lhs.vars();
        for v in self.rhs.vars() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Structural identity used for duplicate suppression. Linear equations
    /// compare by their normalised coefficient vector; others by a sorted
    /// sum-of-products rendering of `lhs - rhs`, orientation-independent.
    pub fn canonical_key(&self) -> String {
        let diff = self.difference();
        if let Some(lf) = diff.linearize(&|_| None) {
            if let Some((_, &lead)) = lf.coeffs.iter().next() {
                let k = 1.0 / lead;
                let mut s = String::from("L");
                for (v, c) in &lf.coeffs {
                    s.push_str(&format!("|{}:{}", v.0, round_key(c * k)));
                }
                s.push_str(&format!("|c:{}", round_key(lf.constant * k)));
                return s;
            }
            return format!("C|{}", round_key(lf.constant));
        }
        let neg = Expr::sub(self.rhs.clone(), self.lhs.clone());
        let a = canon(&diff);
        let b = canon(&neg);
        format!("N|{}", a.min(b))
    }

    pub fn render(&self, names: &dyn Fn(VarId) -> String) -> String {
        format!("{} = {}", self.lhs.show(names), self.rhs.show(names))
    }
}

fn round_key(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn collect_terms(e: &Expr, sign: bool, out: &mut Vec<String>) {
    match e {
        Expr::Bin(BinOp::Add, l, r) => {
            collect_terms(l, sign, out);
            collect_terms(r, sign, out);
        }
        Expr::Bin(BinOp::Sub, l, r) => {
            collect_terms(l, sign, out);
            collect_terms(r, !sign, out);
        }
        Expr::Neg(inner) => collect_terms(inner, !sign, out),
        other => out.push(format!("{}{}", if sign { '+' } else { '-' }, canon_product(other))),
    }
}

fn collect_factors(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Bin(BinOp::Mul, l, r) => {
            collect_factors(l, out);
            collect_factors(r, out);
        }
        other => out.push(canon_atom(other)),
    }
}

fn canon_product(e: &Expr) -> String {
    let mut f = Vec::new();
    collect_factors(e, &mut f);
    f.sort();
    f.join("*")
}

fn canon_atom(e: &Expr) -> String {
    match e {
        Expr::Const(c) => round_key(*c),
        Expr::Var(v) => format!("v{}", v.0),
        Expr::Bin(BinOp::Div, l, r) => format!("({})/({})", canon(l), canon(r)),
        Expr::Bin(BinOp::Pow, l, r) => format!("({})^({})", canon(l), canon(r)),
        Expr::Call(f, inner) => format!("{f:?}({})", canon(inner)),
        Expr::Bin(..) | Expr::Neg(_) => format!("({})", canon(e)),
        other => format!("{other:?}"),
    }
}

fn canon(e: &Expr) -> String {
    let mut terms = Vec::new();
    collect_terms(e, true, &mut terms);
    terms.sort();
    terms.concat()
}

/// Per-variable solving context: admissible domain and an optional visual
/// estimate used to choose between several roots.
pub trait VarContext {
    fn domain(&self, v: VarId) -> (f64, f64);
    fn hint(&self, v: VarId) -> Option<f64>;
}

impl VarContext for Hologram {
    fn domain(&self, v: VarId) -> (f64, f64) {
        match self.var_owner(v) {
            Some(VarOwner::Slot(_, slot)) => slot.domain(),
            _ => (-1e6, 1e6),
        }
    }

    fn hint(&self, v: VarId) -> Option<f64> {
        self.visual_hint(v)
    }
}

/// Context with explicit domains; unlisted variables range over `(-1e6, 1e6)`.
#[derive(Clone, Debug, Default)]
pub struct Domains {
    pub domains: BTreeMap<VarId, (f64, f64)>,
    pub hints: BTreeMap<VarId, f64>,
}

impl VarContext for Domains {
    fn domain(&self, v: VarId) -> (f64, f64) {
        self.domains.get(&v).copied().unwrap_or((-1e6, 1e6))
    }

    fn hint(&self, v: VarId) -> Option<f64> {
        self.hints.get(&v).copied()
    }
}

/// Several in-domain roots were found; `chosen` was kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TieBreak {
    pub var: VarId,
    pub roots: Vec<f64>,
    pub chosen: f64,
    pub by_visual: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquationError {
    #[error("variable v{} is unbound", .0.0)]
    UnboundVariable(VarId),
}

#[derive(Clone, Debug, Default)]
pub struct EquationSet {
    equations: Vec<Equation>,
    keys: HashSet<String>,
    bindings: BTreeMap<VarId, f64>,
    flagged: BTreeSet<usize>,
    tie_breaks: Vec<TieBreak>,
}

impl EquationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn bindings(&self) -> &BTreeMap<VarId, f64> {
        &self.bindings
    }

    pub fn value(&self, v: VarId) -> Option<f64> {
        self.bindings.get(&v).copied()
    }

    /// Records an externally known value (e.g. an attribute given in the
    /// problem). Does not overwrite.
    pub fn bind(&mut self, v: VarId, x: f64) {
        self.bindings.entry(v).or_insert(x);
    }

    pub fn contains(&self, eq: &Equation) -> bool {
        self.keys.contains(&eq.canonical_key())
    }

    /// Indices of equations whose residual exceeded the tolerance once fully
    /// bound.
    pub fn inconsistencies(&self) -> impl Iterator<Item = &Equation> {
        self.flagged.iter().map(|&i| &self.equations[i])
    }

    pub fn inconsistency_count(&self) -> usize {
        self.flagged.len()
    }

    pub fn tie_breaks(&self) -> &[TieBreak] {
        &self.tie_breaks
    }

    /// Equations that still mention an unbound variable.
    pub fn frontier(&self) -> impl Iterator<Item = &Equation> {
        self.equations
            .iter()
            .filter(|e| e.vars().iter().any(|v| !self.bindings.contains_key(v)))
    }

    /// Adds the equations that are not structural duplicates; returns how
    /// many were added.
    pub fn add_equations(&mut self, new: impl IntoIterator<Item = Equation>) -> usize {
        let mut added = 0;
        for eq in new {
            if self.keys.insert(eq.canonical_key()) {
                self.equations.push(eq);
                added += 1;
                self.flag_if_contradicted(self.equations.len() - 1);
            }
        }
        added
    }

    fn flag_if_contradicted(&mut self, i: usize) {
        if let Ok(r) = self.residual(&self.equations[i]) {
            if r > RESIDUAL_TOL {
                self.flagged.insert(i);
            }
        }
    }

    /// `|lhs - rhs|` under the current bindings.
    pub fn residual(&self, eq: &Equation) -> Result<f64, EquationError> {
        for v in eq.vars() {
            if !self.bindings.contains_key(&v) {
                return Err(EquationError::UnboundVariable(v));
            }
        }
        let d = eq
            .difference()
            .eval_vars(&|v| self.bindings.get(&v).copied())
            .unwrap_or(f64::INFINITY);
        Ok(d.abs())
    }

    /// Runs the substitute / linear / univariate passes to a fixpoint and
    /// returns the variables bound by this call.
    pub fn solve(&mut self, ctx: &dyn VarContext) -> BTreeMap<VarId, f64> {
        let mut fresh = BTreeMap::new();
        loop {
            let mut round = self.linear_pass(ctx);
            if round.is_empty() {
                round = self.univariate_pass(ctx);
            }
            if round.is_empty() {
                break;
            }
            for (v, x) in round {
                self.bindings.insert(v, x);
                fresh.insert(v, x);
            }
        }
        for i in 0..self.equations.len() {
            self.flag_if_contradicted(i);
        }
        fresh
    }

    fn linear_pass(&self, ctx: &dyn VarContext) -> BTreeMap<VarId, f64> {
        let bound = |v: VarId| self.bindings.get(&v).copied();
        let rows: Vec<_> = self
            .equations
            .iter()
            .filter_map(|e| e.difference().linearize(&bound))
            .filter(|lf| !lf.is_constant())
            .collect();
        if rows.is_empty() {
            return BTreeMap::new();
        }
        let unknowns: Vec<VarId> = rows
            .iter()
            .flat_map(|r| r.coeffs.keys().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let col: BTreeMap<VarId, usize> = unknowns.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let n = unknowns.len();
        // augmented matrix [A | b] for A·x = -constant
        let mut m: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let mut row = vec![0.0; n + 1];
                for (v, c) in &r.coeffs {
                    row[col[v]] = *c;
                }
                row[n] = -r.constant;
                row
            })
            .collect();
        let pivots = rref(&mut m, n);
        let mut out = BTreeMap::new();
        for (r, &pc) in pivots.iter().enumerate() {
            let determined = (0..n).all(|c| c == pc || m[r][c].abs() < 1e-9);
            if !determined {
                continue;
            }
            let v = unknowns[pc];
            let x = m[r][n];
            let (lo, hi) = ctx.domain(v);
            if x > lo && x < hi && x.is_finite() {
                out.insert(v, x);
            }
        }
        out
    }

    fn univariate_pass(&mut self, ctx: &dyn VarContext) -> BTreeMap<VarId, f64> {
        let mut out = BTreeMap::new();
        let mut notes = Vec::new();
        for eq in &self.equations {
            let unknown: Vec<VarId> = eq
                .vars()
                .into_iter()
                .filter(|v| !self.bindings.contains_key(v) && !out.contains_key(v))
                .collect();
            if unknown.len() != 1 {
                continue;
            }
            let v = unknown[0];
            let diff = eq.difference();
            let f = |t: f64| {
                diff.eval_vars(&|w| if w == v { Some(t) } else { self.bindings.get(&w).copied() })
            };
            let (lo, hi) = ctx.domain(v);
            let roots = find_roots(&f, lo, hi);
            if roots.is_empty() {
                continue;
            }
            let (chosen, by_visual) = match ctx.hint(v) {
                Some(h) if roots.len() > 1 => (
                    *roots
                        .iter()
                        .min_by(|a, b| (*a - h).abs().total_cmp(&(*b - h).abs()))
                        .expect("non-empty"),
                    true,
                ),
                _ => (
                    roots.iter().copied().find(|r| *r > 0.0).unwrap_or(roots[0]),
                    false,
                ),
            };
            if roots.len() > 1 {
                notes.push(TieBreak { var: v, roots: roots.clone(), chosen, by_visual });
            }
            out.insert(v, chosen);
        }
        self.tie_breaks.extend(notes);
        out
    }

    /// Renders every equation with hologram names.
    pub fn render_all(&self, g: &Hologram) -> Vec<String> {
        self.equations.iter().map(|e| e.render(&|v| g.var_name(v))).collect()
    }
}

/// Gauss-Jordan elimination with partial pivoting over the first `n`
/// columns; returns the pivot column of each leading row.
fn rref(m: &mut [Vec<f64>], n: usize) -> Vec<usize> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == rows {
            break;
        }
        let (best, mag) = (r..rows)
            .map(|i| (i, m[i][c].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("rows remain");
        if mag < 1e-9 {
            continue;
        }
        m.swap(r, best);
        let p = m[r][c];
        for x in m[r].iter_mut() {
            *x /= p;
        }
        for i in 0..rows {
            if i != r {
                let k = m[i][c];
                if k != 0.0 {
                    for j in 0..=n {
                        m[i][j] -= k * m[r][j];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn sample_points(lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    if hi <= 360.0 && lo >= -360.0 {
        let steps = 3600;
        for i in 1..steps {
            pts.push(lo + (hi - lo) * i as f64 / steps as f64);
        }
        return pts;
    }
    // log-spaced magnitudes cover both tiny and large lengths
    let steps = 2400;
    let positive: Vec<f64> = (0..=steps)
        .map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / steps as f64))
        .filter(|x| *x > lo && *x < hi)
        .collect();
    if lo < 0.0 {
        pts.extend(positive.iter().rev().map(|x| -x).filter(|x| *x > lo));
        pts.push(0.0);
    }
    pts.extend(positive);
    pts
}

/// In-domain roots of `f`, ascending.
pub fn find_roots(f: &dyn Fn(f64) -> Option<f64>, lo: f64, hi: f64) -> Vec<f64> {
    let pts = sample_points(lo, hi);
    let mut roots: Vec<f64> = Vec::new();
    let push = |x: f64, roots: &mut Vec<f64>| {
        if !roots.iter().any(|r| (r - x).abs() <= 1e-7 * x.abs().max(1.0)) {
            roots.push(x);
        }
    };
    let mut prev: Option<(f64, f64)> = None;
    for &x in &pts {
        let y = match f(x) {
            Some(y) => y,
            None => {
                prev = None;
                continue;
            }
        };
        if y == 0.0 {
            push(x, &mut roots);
        } else if let Some((px, py)) = prev {
            if py != 0.0 && py.signum() != y.signum() {
                if let Some(r) = bisect(f, px, x, py) {
                    push(r, &mut roots);
                }
            }
        }
        prev = Some((x, y));
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn bisect(f: &dyn Fn(f64) -> Option<f64>, mut a: f64, mut b: f64, mut fa: f64) -> Option<f64> {
    let (lo, hi) = (a.min(b), a.max(b));
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if (b - a).abs() <= 1e-15 * a.abs().max(1.0) {
            break;
        }
    }
    let mut x = 0.5 * (a + b);
    // Newton polish with a central difference
    for _ in 0..3 {
        let h = 1e-7 * x.abs().max(1.0);
        let (fx, fp, fm) = (f(x)?, f(x + h)?, f(x - h)?);
        let d = (fp - fm) / (2.0 * h);
        if d.abs() < 1e-300 {
            break;
        }
        let nx = x - fx / d;
        if nx >= lo && nx <= hi && f(nx).is_some_and(|v| v.abs() < fx.abs()) {
            x = nx;
        } else {
            break;
        }
    }
    // a sign change across a pole is not a root
    let scale = 1.0 + x.abs();
    (f(x)?.abs() <= 1e-6 * scale).then_some(x)
}

/// Renders a binding as `name = value`.
pub fn render_binding(g: &Hologram, v: VarId, x: f64) -> String {
    format!("{} = {}", g.var_name(v), format_number(x))
}
