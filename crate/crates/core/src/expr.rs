//! The expression language shared by model constraints, graph expansions,
//! equation templates and instantiated equations.
//!
//! One grammar, one evaluator: a template like `measure(a1) + measure(a2) = 180`
//! is parsed into [`Expr`] trees whose leaves are placeholder references
//! ([`Expr::Attr`], [`Expr::Visual`]). Instantiation against a mapping rewrites
//! those leaves into attribute variables ([`Expr::Var`]) or constants.
//!
//! Trigonometric functions work in degrees.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hologram::{Slot, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.to_radians().sin(),
            Func::Cos => x.to_radians().cos(),
            Func::Tan => x.to_radians().tan(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
        }
    }
}

/// Reference to a diagram-derived quantity of a pattern placeholder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VisualRef {
    Length(String),
    Measure(String),
    /// Acute angle between the directions of two lines, in [0, 90].
    LineAngle(String, String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Var(VarId),
    /// A free symbol as written in a problem literal (`x`, `y`).
    Sym(String),
    /// Mathematical attribute of a pattern placeholder.
    Attr(String, Slot),
    Visual(VisualRef),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(v: VarId) -> Expr {
        Expr::Var(v)
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Add, l, r)
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Sub, l, r)
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Mul, l, r)
    }

    pub fn div(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Div, l, r)
    }

    pub fn pow(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Pow, l, r)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(
            self,
            Expr::Const(_) | Expr::Var(_) | Expr::Sym(_) | Expr::Attr(..) | Expr::Visual(_)
        )
    }

    /// Evaluates the tree, asking `leaf` for the value of every non-constant
    /// leaf. Returns `None` when a leaf is unavailable or the result is not
    /// finite.
    pub fn eval(&self, leaf: &mut dyn FnMut(&Expr) -> Option<f64>) -> Option<f64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(_) | Expr::Sym(_) | Expr::Attr(..) | Expr::Visual(_) => leaf(self)?,
            Expr::Neg(e) => -e.eval(leaf)?,
            Expr::Bin(op, l, r) => {
                let a = l.eval(leaf)?;
                let b = r.eval(leaf)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => f.apply(e.eval(leaf)?),
        };
        v.is_finite().then_some(v)
    }

    /// Evaluates an expression whose only non-constant leaves are variables.
    pub fn eval_vars(&self, value: &dyn Fn(VarId) -> Option<f64>) -> Option<f64> {
        self.eval(&mut |leaf| match leaf {
            Expr::Var(v) => value(*v),
            _ => None,
        })
    }

    /// Rebuilds the tree, replacing every leaf by `f(leaf)`.
    pub fn try_map_leaves<E>(
        &self,
        f: &mut dyn FnMut(&Expr) -> Result<Expr, E>,
    ) -> Result<Expr, E> {
        Ok(match self {
            Expr::Neg(e) => Expr::Neg(Box::new(e.try_map_leaves(f)?)),
            Expr::Bin(op, l, r) => Expr::Bin(
                *op,
                Box::new(l.try_map_leaves(f)?),
                Box::new(r.try_map_leaves(f)?),
            ),
            Expr::Call(func, e) => Expr::Call(*func, Box::new(e.try_map_leaves(f)?)),
            leaf => f(leaf)?,
        })
    }

    pub fn map_leaves(&self, f: &mut dyn FnMut(&Expr) -> Expr) -> Expr {
        self.try_map_leaves::<std::convert::Infallible>(&mut |e| Ok(f(e)))
            .unwrap_or_else(|never| match never {})
    }

    pub fn visit_leaves<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        match self {
            Expr::Neg(e) | Expr::Call(_, e) => e.visit_leaves(f),
            Expr::Bin(_, l, r) => {
                l.visit_leaves(f);
                r.visit_leaves(f);
            }
            leaf => f(leaf),
        }
    }

    /// Distinct variables in first-occurrence order.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |e| {
            if let Expr::Var(v) = e {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
        });
        out
    }

    /// Placeholder names referenced by attribute or visual leaves.
    pub fn placeholders(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |s: &String| {
            if !out.contains(s) {
                out.push(s.clone());
            }
        };
        self.visit_leaves(&mut |e| match e {
            Expr::Attr(p, _) => push(p),
            Expr::Visual(VisualRef::Length(p) | VisualRef::Measure(p)) => push(p),
            Expr::Visual(VisualRef::LineAngle(a, b)) => {
                push(a);
                push(b);
            }
            _ => {}
        });
        out
    }

    pub fn has_visual(&self) -> bool {
        let mut found = false;
        self.visit_leaves(&mut |e| found |= matches!(e, Expr::Visual(_)));
        found
    }

    /// Affine form of the expression once bound variables are folded into
    /// constants, or `None` when it is not linear in the remaining unknowns.
    pub fn linearize(&self, bound: &dyn Fn(VarId) -> Option<f64>) -> Option<LinearForm> {
        match self {
            Expr::Const(c) => Some(LinearForm::constant(*c)),
            Expr::Var(v) => Some(match bound(*v) {
                Some(c) => LinearForm::constant(c),
                None => LinearForm::unit(*v),
            }),
            Expr::Sym(_) | Expr::Attr(..) | Expr::Visual(_) => None,
            Expr::Neg(e) => Some(e.linearize(bound)?.scale(-1.0)),
            Expr::Bin(op, l, r) => {
                let a = l.linearize(bound)?;
                let b = r.linearize(bound)?;
                match op {
                    BinOp::Add => Some(a.plus(&b, 1.0)),
                    BinOp::Sub => Some(a.plus(&b, -1.0)),
                    BinOp::Mul => match (a.is_constant(), b.is_constant()) {
                        (true, _) => Some(b.scale(a.constant)),
                        (_, true) => Some(a.scale(b.constant)),
                        _ => None,
                    },
                    BinOp::Div => {
                        if b.is_constant() && b.constant.abs() > 1e-12 {
                            Some(a.scale(1.0 / b.constant))
                        } else {
                            None
                        }
                    }
                    BinOp::Pow => {
                        if !b.is_constant() {
                            return None;
                        }
                        if a.is_constant() {
                            let v = a.constant.powf(b.constant);
                            v.is_finite().then(|| LinearForm::constant(v))
                        } else if (b.constant - 1.0).abs() < 1e-12 {
                            Some(a)
                        } else {
                            None
                        }
                    }
                }
            }
            Expr::Call(f, e) => {
                let a = e.linearize(bound)?;
                if !a.is_constant() {
                    return None;
                }
                let v = f.apply(a.constant);
                v.is_finite().then(|| LinearForm::constant(v))
            }
        }
    }

    /// Renders with a caller-supplied name for every variable.
    pub fn show<'a>(&'a self, names: &'a dyn Fn(VarId) -> String) -> Shown<'a> {
        Shown { expr: self, names }
    }
}

/// `Σ coeffs[v]·v + constant`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm {
    pub coeffs: BTreeMap<VarId, f64>,
    pub constant: f64,
}

impl LinearForm {
    pub fn constant(c: f64) -> Self {
        LinearForm { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn unit(v: VarId) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, 1.0);
        LinearForm { coeffs, constant: 0.0 }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn scale(mut self, k: f64) -> Self {
        self.constant *= k;
        for c in self.coeffs.values_mut() {
            *c *= k;
        }
        self.prune()
    }

    fn plus(mut self, other: &LinearForm, sign: f64) -> Self {
        self.constant += sign * other.constant;
        for (v, c) in &other.coeffs {
            *self.coeffs.entry(*v).or_insert(0.0) += sign * c;
        }
        self.prune()
    }

    fn prune(mut self) -> Self {
        self.coeffs.retain(|_, c| c.abs() > 1e-12);
        self
    }
}

pub struct Shown<'a> {
    expr: &'a Expr,
    names: &'a dyn Fn(VarId) -> String,
}

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.names)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, &|v| format!("v{}", v.0))
    }
}

pub fn format_number(x: f64) -> String {
    if (x - std::f64::consts::PI).abs() < 1e-15 {
        return "pi".to_string();
    }
    if (x - x.round()).abs() < 1e-9 && x.abs() < 1e15 {
        return format!("{}", x.round() as i64);
    }
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s.is_empty() || s == "0" && x != 0.0 {
        // very small magnitudes fall back to full precision
        return format!("{x}");
    }
    s.to_string()
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        Expr::Const(c) if *c < 0.0 => 3,
        _ => 5,
    }
}

fn write_expr(
    f: &mut fmt::Formatter<'_>,
    e: &Expr,
    names: &dyn Fn(VarId) -> String,
) -> fmt::Result {
    let child = |f: &mut fmt::Formatter<'_>, c: &Expr, parens: bool| -> fmt::Result {
        if parens {
            write!(f, "(")?;
            write_expr(f, c, names)?;
            write!(f, ")")
        } else {
            write_expr(f, c, names)
        }
    };
    match e {
        Expr::Const(c) => write!(f, "{}", format_number(*c)),
        Expr::Var(v) => write!(f, "{}", names(*v)),
        Expr::Sym(s) => write!(f, "{s}"),
        Expr::Attr(p, slot) => write!(f, "{}({p})", slot.dsl_name()),
        Expr::Visual(VisualRef::Length(p)) => write!(f, "vlength({p})"),
        Expr::Visual(VisualRef::Measure(p)) => write!(f, "vmeasure({p})"),
        Expr::Visual(VisualRef::LineAngle(a, b)) => write!(f, "vangle({a}, {b})"),
        Expr::Neg(inner) => {
            write!(f, "-")?;
            child(f, inner, precedence(inner) < 4)
        }
        Expr::Call(func, inner) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, inner, names)?;
            write!(f, ")")
        }
        Expr::Bin(op, l, r) => {
            let p = precedence(e);
            let (sym, spaced) = match op {
                BinOp::Add => ("+", true),
                BinOp::Sub => ("-", true),
                BinOp::Mul => ("*", false),
                BinOp::Div => ("/", false),
                BinOp::Pow => ("^", false),
            };
            let left_parens = if *op == BinOp::Pow {
                precedence(l) <= p
            } else {
                precedence(l) < p
            };
            let right_parens = match op {
                BinOp::Sub | BinOp::Div => precedence(r) <= p,
                BinOp::Pow => precedence(r) < p,
                _ => precedence(r) < p,
            };
            child(f, l, left_parens)?;
            if spaced {
                write!(f, " {sym} ")?;
            } else {
                write!(f, "{sym}")?;
            }
            child(f, r, right_parens)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Tolerance {
    Abs(f64),
    /// Fraction of the larger magnitude of the two sides.
    Rel(f64),
}

impl Tolerance {
    pub fn admits(self, a: f64, b: f64) -> bool {
        let diff = (a - b).abs();
        match self {
            Tolerance::Abs(t) => diff <= t,
            Tolerance::Rel(p) => diff <= p * a.abs().max(b.abs()),
        }
    }
}

/// Absolute tolerance for mathematical-constraint equality.
pub const MATH_EPS: f64 = 1e-6;
pub const DEFAULT_VISUAL_ANGLE_TOL: Tolerance = Tolerance::Abs(5.0);
pub const DEFAULT_VISUAL_LENGTH_TOL: Tolerance = Tolerance::Rel(0.08);

/// `lhs op rhs`, optionally with an explicit tolerance (`... within 5` or
/// `... within 8%`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
    pub tolerance: Option<Tolerance>,
}

impl Constraint {
    /// Tolerance used when none is declared: math constraints compare at
    /// 1e-6, visual ones at 8% relative when they involve lengths and 5
    /// degrees otherwise.
    pub fn effective_tolerance(&self) -> Tolerance {
        if let Some(t) = self.tolerance {
            return t;
        }
        let mut visual = false;
        let mut lengths = false;
        for side in [&self.lhs, &self.rhs] {
            side.visit_leaves(&mut |e| {
                if let Expr::Visual(r) = e {
                    visual = true;
                    lengths |= matches!(r, VisualRef::Length(_));
                }
            });
        }
        match (visual, lengths) {
            (false, _) => Tolerance::Abs(MATH_EPS),
            (true, true) => DEFAULT_VISUAL_LENGTH_TOL,
            (true, false) => DEFAULT_VISUAL_ANGLE_TOL,
        }
    }

    /// `None` when some leaf cannot be evaluated.
    pub fn check(&self, leaf: &mut dyn FnMut(&Expr) -> Option<f64>) -> Option<bool> {
        let a = self.lhs.eval(leaf)?;
        let b = self.rhs.eval(leaf)?;
        let tol = self.effective_tolerance();
        let close = tol.admits(a, b);
        Some(match self.op {
            CmpOp::Eq => close,
            CmpOp::Ne => !close,
            CmpOp::Lt => a < b && !close,
            CmpOp::Le => a < b || close,
            CmpOp::Gt => a > b && !close,
            CmpOp::Ge => a > b || close,
        })
    }

    pub fn placeholders(&self) -> Vec<String> {
        let mut out = self.lhs.placeholders();
        for p in self.rhs.placeholders() {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)?;
        match self.tolerance {
            Some(Tolerance::Abs(t)) => write!(f, " within {}", format_number(t)),
            Some(Tolerance::Rel(p)) => write!(f, " within {}%", format_number(p * 100.0)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("expression syntax error at {pos}: {msg}")]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Op(char),
    Cmp(CmpOp),
    Percent,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| ExprError {
                pos: start,
                msg: format!("bad number '{text}'"),
            })?;
            out.push((start, Tok::Num(v)));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok = match two.as_str() {
            "!=" => Some(Tok::Cmp(CmpOp::Ne)),
            "<=" => Some(Tok::Cmp(CmpOp::Le)),
            ">=" => Some(Tok::Cmp(CmpOp::Ge)),
            "==" => Some(Tok::Cmp(CmpOp::Eq)),
            _ => None,
        };
        if let Some(t) = tok {
            out.push((start, t));
            i += 2;
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '=' => Tok::Cmp(CmpOp::Eq),
            '<' => Tok::Cmp(CmpOp::Lt),
            '>' => Tok::Cmp(CmpOp::Gt),
            '%' => Tok::Percent,
            _ => {
                return Err(ExprError { pos: start, msg: format!("unexpected character '{c}'") })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { pos: self.here(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ExprError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {t:?}"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op(c @ ('*' | '/'))) => {
                    let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::bin(op, lhs, rhs);
                }
                // implicit multiplication: `2x`, `3(x + 1)`
                Some(Tok::Ident(name)) if name != "within" => {
                    let rhs = self.power()?;
                    lhs = Expr::mul(lhs, rhs);
                }
                Some(Tok::LParen) => {
                    let rhs = self.power()?;
                    lhs = Expr::mul(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn ident_arg(&mut self) -> Result<String, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected placeholder name"),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() != Some(&Tok::LParen) {
                    return Ok(match name.as_str() {
                        "pi" => Expr::Const(std::f64::consts::PI),
                        _ => Expr::Sym(name),
                    });
                }
                self.pos += 1;
                let e = if let Some(func) = Func::from_name(&name) {
                    Expr::Call(func, Box::new(self.expr()?))
                } else if let Some(slot) = Slot::from_dsl_name(&name) {
                    Expr::Attr(self.ident_arg()?, slot)
                } else {
                    match name.as_str() {
                        "vlength" => Expr::Visual(VisualRef::Length(self.ident_arg()?)),
                        "vmeasure" => Expr::Visual(VisualRef::Measure(self.ident_arg()?)),
                        "vangle" => {
                            let a = self.ident_arg()?;
                            self.expect(Tok::Comma)?;
                            let b = self.ident_arg()?;
                            Expr::Visual(VisualRef::LineAngle(a, b))
                        }
                        _ => return self.err(format!("unknown function '{name}'")),
                    }
                };
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => self.err("expected expression"),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ExprError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, end: src.len() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

pub fn parse_constraint(src: &str) -> Result<Constraint, ExprError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, end: src.len() };
    let lhs = p.expr()?;
    let op = match p.peek() {
        Some(Tok::Cmp(op)) => *op,
        _ => return p.err("expected comparison operator"),
    };
    p.pos += 1;
    let rhs = p.expr()?;
    let mut tolerance = None;
    if let Some(Tok::Ident(w)) = p.peek() {
        if w == "within" {
            p.pos += 1;
            let v = match p.peek() {
                Some(Tok::Num(v)) => *v,
                _ => return p.err("expected tolerance value"),
            };
            p.pos += 1;
            tolerance = Some(if p.peek() == Some(&Tok::Percent) {
                p.pos += 1;
                Tolerance::Rel(v / 100.0)
            } else {
                Tolerance::Abs(v)
            });
        }
    }
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(Constraint { lhs, op, rhs, tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_vars(_: VarId) -> Option<f64> {
        None
    }

    #[test]
    fn implicit_multiplication() {
        let e = parse_expr("2x+1").unwrap();
        let want = Expr::add(Expr::mul(Expr::num(2.0), Expr::Sym("x".into())), Expr::num(1.0));
        assert_eq!(e, want);
    }

    #[test]
    fn precedence_and_power() {
        let e = parse_expr("2 + 3 * 4 ^ 2").unwrap();
        assert_eq!(e.eval(&mut |_| None), Some(50.0));
        let e = parse_expr("-2^2").unwrap();
        assert_eq!(e.eval(&mut |_| None), Some(-4.0));
        let e = parse_expr("10 - 4 - 3").unwrap();
        assert_eq!(e.eval(&mut |_| None), Some(3.0));
    }

    #[test]
    fn trig_is_in_degrees() {
        let e = parse_expr("sin(30) + cos(60)").unwrap();
        assert!((e.eval(&mut |_| None).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn attribute_references() {
        let c = parse_constraint("measure(a1) + measure(a2) = 180").unwrap();
        assert_eq!(c.placeholders(), vec!["a1".to_string(), "a2".to_string()]);
        assert_eq!(c.effective_tolerance(), Tolerance::Abs(MATH_EPS));
        let ok = c.check(&mut |e| match e {
            Expr::Attr(p, _) if p == "a1" => Some(110.0),
            Expr::Attr(_, _) => Some(70.0),
            _ => None,
        });
        assert_eq!(ok, Some(true));
    }

    #[test]
    fn visual_tolerances() {
        let c = parse_constraint("vmeasure(a) = 60").unwrap();
        assert_eq!(c.effective_tolerance(), DEFAULT_VISUAL_ANGLE_TOL);
        assert_eq!(c.check(&mut |_| Some(59.3)), Some(true));
        let c = parse_constraint("vlength(a) = vlength(b)").unwrap();
        assert_eq!(c.effective_tolerance(), DEFAULT_VISUAL_LENGTH_TOL);
        let mut vals = [100.0, 115.0].into_iter();
        assert_eq!(c.check(&mut |_| vals.next()), Some(false));
        let c = parse_constraint("vmeasure(a) = 60 within 2").unwrap();
        assert_eq!(c.tolerance, Some(Tolerance::Abs(2.0)));
        let c = parse_constraint("vlength(a) = 60 within 10%").unwrap();
        assert_eq!(c.tolerance, Some(Tolerance::Rel(0.1)));
    }

    #[test]
    fn linearize_folds_bound_vars() {
        let e = Expr::sub(
            Expr::mul(Expr::var(VarId(0)), Expr::var(VarId(1))),
            Expr::num(6.0),
        );
        assert!(e.linearize(&no_vars).is_none());
        let lf = e.linearize(&|v| (v == VarId(0)).then_some(2.0)).unwrap();
        assert_eq!(lf.coeffs.get(&VarId(1)), Some(&2.0));
        assert_eq!(lf.constant, -6.0);
    }

    #[test]
    fn display_round_trips_structure() {
        for src in ["2*x + 1", "(a + b)/2", "a - (b - c)", "x^2 + y^2", "-(a + b)", "sqrt(x)*3"] {
            let e = parse_expr(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_expr(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn errors_carry_position() {
        let err = parse_expr("1 + * 2").unwrap_err();
        assert_eq!(err.pos, 4);
        assert!(parse_expr("foo(a)").is_err());
        assert!(parse_constraint("a + b").is_err());
    }
}
