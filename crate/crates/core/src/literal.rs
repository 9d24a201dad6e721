//! Formal-language literals (`Triangle(A, B, C)`,
//! `Equals(LengthOf(Line(A, B)), 2x+1)`) and the problem file that carries
//! them.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! literal  := IDENT '(' args ')'
//! args     := term (',' term)*
//! term     := product (('+' | '-') product)*
//! product  := unary (('*' | '/') unary | implicit)*     implicit: `2x`, `3(x+1)`
//! unary    := '-' unary | power
//! power    := primary ('^' unary)?
//! primary  := NUMBER | IDENT | IDENT '(' args ')' | '(' term ')'
//! ```
//!
//! An identifier followed by `(` must name a predicate from
//! [`SIGNATURES`]; bare identifiers are point names or symbolic variables,
//! resolved by position when the hologram is built.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Predicate name and the argument counts it accepts. This is an
/// engineering superset of the predicates seen in geometry-problem
/// annotations; `None` for the upper bound means variadic.
pub const SIGNATURES: &[(&str, usize, Option<usize>)] = &[
    // primitives and shapes
    ("Point", 1, Some(1)),
    ("Line", 2, Some(2)),
    ("Angle", 1, Some(3)),
    ("Arc", 2, Some(2)),
    ("Circle", 1, Some(1)),
    ("Triangle", 3, Some(3)),
    ("Quadrilateral", 4, Some(4)),
    ("Parallelogram", 4, Some(4)),
    ("Rectangle", 4, Some(4)),
    ("Square", 4, Some(4)),
    ("Rhombus", 4, Some(4)),
    ("Trapezoid", 4, Some(4)),
    ("Kite", 4, Some(4)),
    ("Pentagon", 5, Some(5)),
    ("Hexagon", 6, Some(6)),
    ("Polygon", 3, Some(8)),
    // relations
    ("PointLiesOnLine", 2, Some(2)),
    ("PointLiesOnCircle", 2, Some(2)),
    ("Parallel", 2, Some(2)),
    ("Perpendicular", 2, Some(2)),
    ("BisectsAngle", 2, Some(2)),
    ("Tangent", 2, Some(2)),
    ("Similar", 2, Some(2)),
    ("Congruent", 2, Some(2)),
    ("IsMidpointOf", 2, Some(2)),
    ("IsDiameterOf", 2, Some(2)),
    ("IsRadiusOf", 2, Some(2)),
    ("IsChordOf", 2, Some(2)),
    ("Equilateral", 1, Some(1)),
    ("RightAngle", 1, Some(1)),
    // measures
    ("LengthOf", 1, Some(1)),
    ("MeasureOf", 1, Some(1)),
    ("AreaOf", 1, Some(1)),
    ("RadiusOf", 1, Some(1)),
    ("DiameterOf", 1, Some(1)),
    ("PerimeterOf", 1, Some(1)),
    ("CircumferenceOf", 1, Some(1)),
    ("RatioOf", 2, Some(2)),
    ("HalfOf", 1, Some(1)),
    ("SqrtOf", 1, Some(1)),
    ("SinOf", 1, Some(1)),
    ("CosOf", 1, Some(1)),
    ("TanOf", 1, Some(1)),
    ("Add", 2, None),
    ("Mul", 2, None),
    ("Sub", 2, Some(2)),
    ("Div", 2, Some(2)),
    // statements
    ("Equals", 2, Some(2)),
    ("Find", 1, Some(1)),
];

pub fn signature(name: &str) -> Option<(usize, Option<usize>)> {
    SIGNATURES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, lo, hi)| (*lo, *hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl ArithOp {
    fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => " + ",
            ArithOp::Sub => " - ",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
            ArithOp::Pow => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Term {
    Pred(Literal),
    Num(f64),
    Ident(String),
    Op(ArithOp, Box<Term>, Box<Term>),
    Neg(Box<Term>),
}

impl Term {
    fn precedence(&self) -> u8 {
        match self {
            Term::Op(op, ..) => op.precedence(),
            Term::Neg(_) => 3,
            _ => 5,
        }
    }

    pub fn as_pred(&self) -> Option<&Literal> {
        match self {
            Term::Pred(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match self {
            Term::Ident(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Literal {
    pub name: String,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(name: impl Into<String>, args: Vec<Term>) -> Self {
        Literal { name: name.into(), args }
    }

    /// Checks this literal and every nested predicate against the
    /// signature table.
    pub fn validate(&self) -> Result<(), LiteralError> {
        let (lo, hi) = signature(&self.name)
            .ok_or_else(|| LiteralError::UnknownPredicate(self.name.clone()))?;
        let n = self.args.len();
        if n < lo || hi.is_some_and(|h| n > h) {
            return Err(LiteralError::Arity { name: self.name.clone(), got: n });
        }
        for a in &self.args {
            validate_term(a)?;
        }
        Ok(())
    }
}

fn validate_term(t: &Term) -> Result<(), LiteralError> {
    match t {
        Term::Pred(l) => l.validate(),
        Term::Op(_, a, b) => {
            validate_term(a)?;
            validate_term(b)
        }
        Term::Neg(a) => validate_term(a),
        Term::Num(_) | Term::Ident(_) => Ok(()),
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, t: &Term, parens: bool| {
            if parens {
                write!(f, "({t})")
            } else {
                write!(f, "{t}")
            }
        };
        match self {
            Term::Pred(l) => write!(f, "{l}"),
            Term::Num(x) => write!(f, "{x}"),
            Term::Ident(s) => write!(f, "{s}"),
            Term::Neg(t) => {
                write!(f, "-")?;
                wrap(f, t, t.precedence() < 4)
            }
            Term::Op(op, l, r) => {
                let p = op.precedence();
                let (lp, rp) = if *op == ArithOp::Pow {
                    (l.precedence() <= p, r.precedence() < 3)
                } else {
                    (l.precedence() < p, r.precedence() <= p)
                };
                wrap(f, l, lp)?;
                write!(f, "{}", op.symbol())?;
                wrap(f, r, rp)
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiteralError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown predicate '{0}'")]
    UnknownPredicate(String),
    #[error("predicate '{name}' does not accept {got} argument(s)")]
    Arity { name: String, got: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, LiteralError> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].1.is_ascii_digit() || bytes[i].1 == '.') {
                i += 1;
            }
            let text: String = bytes[start..i].iter().map(|(_, c)| c).collect();
            let v = text
                .parse()
                .map_err(|_| LiteralError::Syntax { pos, msg: format!("bad number '{text}'") })?;
            out.push((pos, Tok::Num(v)));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].1.is_alphanumeric() || bytes[i].1 == '_' || bytes[i].1 == '\'') {
                i += 1;
            }
            out.push((pos, Tok::Ident(bytes[start..i].iter().map(|(_, c)| c).collect())));
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                _ => return Err(LiteralError::Syntax { pos, msg: format!("unexpected '{c}'") }),
            };
            out.push((pos, t));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|(_, t)| t)
    }

    fn fail<T>(&self, msg: &str) -> Result<T, LiteralError> {
        let pos = self.toks.get(self.at).map_or(self.len, |(p, _)| *p);
        Err(LiteralError::Syntax { pos, msg: msg.to_string() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn literal(&mut self) -> Result<Literal, LiteralError> {
        let name = match self.peek() {
            Some(Tok::Ident(n)) => n.clone(),
            _ => return self.fail("expected predicate name"),
        };
        self.at += 1;
        if signature(&name).is_none() {
            return Err(LiteralError::UnknownPredicate(name));
        }
        if !self.eat(&Tok::LParen) {
            return self.fail("expected '('");
        }
        let mut args = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                args.push(self.term()?);
                if self.eat(&Tok::Comma) {
                    continue;
                }
                if self.eat(&Tok::RParen) {
                    break;
                }
                return self.fail("expected ',' or ')'");
            }
        }
        Ok(Literal { name, args })
    }

    fn term(&mut self) -> Result<Term, LiteralError> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { ArithOp::Add } else { ArithOp::Sub };
            self.at += 1;
            lhs = Term::Op(op, Box::new(lhs), Box::new(self.product()?));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Term, LiteralError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op(c @ ('*' | '/'))) => {
                    let op = if *c == '*' { ArithOp::Mul } else { ArithOp::Div };
                    self.at += 1;
                    lhs = Term::Op(op, Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    lhs = Term::Op(ArithOp::Mul, Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Term, LiteralError> {
        if self.eat(&Tok::Op('-')) {
            return Ok(Term::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Term, LiteralError> {
        let base = self.primary()?;
        if self.eat(&Tok::Op('^')) {
            return Ok(Term::Op(ArithOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Term, LiteralError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(Term::Num(v))
            }
            Some(Tok::Ident(name)) => {
                if self.peek2() == Some(&Tok::LParen) {
                    Ok(Term::Pred(self.literal()?))
                } else {
                    self.at += 1;
                    Ok(Term::Ident(name))
                }
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let t = self.term()?;
                if !self.eat(&Tok::RParen) {
                    return self.fail("expected ')'");
                }
                Ok(t)
            }
            _ => self.fail("expected term"),
        }
    }
}

/// Parses and validates one literal.
pub fn parse_literal(src: &str) -> Result<Literal, LiteralError> {
    if src.trim().is_empty() {
        return Err(LiteralError::Syntax { pos: 0, msg: "empty literal".into() });
    }
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, len: src.len() };
    let lit = p.literal()?;
    if p.at != p.toks.len() {
        return p.fail("trailing input");
    }
    lit.validate()?;
    Ok(lit)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInput {
    pub id: String,
    pub text_literals: Vec<Literal>,
    pub diagram_literals: Vec<Literal>,
    pub point_coords: BTreeMap<String, (f64, f64)>,
    pub choices: [f64; 4],
    pub answer_index: Option<usize>,
    /// Optional category tag (`Line`, `Triangle`, `Quad`, `Circle`, `Other`).
    pub problem_type: Option<String>,
}

impl ProblemInput {
    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.text_literals.iter().chain(&self.diagram_literals)
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid problem: {}", .0.join("; "))]
    Validation(Vec<String>),
}

/// On-disk problem document.
#[derive(Debug, Deserialize, Serialize)]
pub struct ProblemFile {
    pub id: String,
    #[serde(default)]
    pub text_literals: Vec<String>,
    #[serde(default)]
    pub diagram_literals: Vec<String>,
    #[serde(default)]
    pub point_coords: BTreeMap<String, [f64; 2]>,
    pub choices: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_index: Option<usize>,
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub problem_type: Option<String>,
}

pub fn parse_problem(json: &str) -> Result<ProblemInput, ProblemError> {
    let file: ProblemFile =
        serde_json::from_str(json).map_err(|e| ProblemError::Validation(vec![e.to_string()]))?;
    let mut errors = Vec::new();
    let parse_all = |items: &[String], errors: &mut Vec<String>| {
        items
            .iter()
            .filter_map(|s| match parse_literal(s) {
                Ok(l) => Some(l),
                Err(e) => {
                    errors.push(format!("'{s}': {e}"));
                    None
                }
            })
            .collect::<Vec<_>>()
    };
    let text_literals = parse_all(&file.text_literals, &mut errors);
    let diagram_literals = parse_all(&file.diagram_literals, &mut errors);
    let finds = text_literals.iter().filter(|l| l.name == "Find").count();
    if finds != 1 {
        errors.push(format!("expected exactly one Find literal in text_literals, found {finds}"));
    }
    if file.choices.len() != 4 {
        errors.push(format!("expected 4 choices, found {}", file.choices.len()));
    }
    if file.choices.iter().any(|c| !c.is_finite()) {
        errors.push("choices must be finite".into());
    }
    if let Some(i) = file.answer_index {
        if i > 3 {
            errors.push(format!("answer_index {i} out of range 0..3"));
        }
    }
    for (name, [x, y]) in &file.point_coords {
        if !x.is_finite() || !y.is_finite() {
            errors.push(format!("coordinate of {name} is not finite"));
        }
    }
    if !errors.is_empty() {
        return Err(ProblemError::Validation(errors));
    }
    let mut choices = [0.0; 4];
    choices.copy_from_slice(&file.choices);
    Ok(ProblemInput {
        id: file.id,
        text_literals,
        diagram_literals,
        point_coords: file.point_coords.into_iter().map(|(k, [x, y])| (k, (x, y))).collect(),
        choices,
        answer_index: file.answer_index,
        problem_type: file.problem_type,
    })
}

pub fn load_problem(path: &Path) -> Result<ProblemInput, ProblemError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ProblemError::Io { path: path.display().to_string(), source })?;
    parse_problem(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn id(s: &str) -> Term {
        Term::Ident(s.into())
    }

    fn pred(name: &str, args: Vec<Term>) -> Term {
        Term::Pred(Literal::new(name, args))
    }

    #[test]
    fn point_on_line() {
        let l = parse_literal("PointLiesOnLine(A, Line(B, C))").unwrap();
        assert_eq!(l.name, "PointLiesOnLine");
        assert_eq!(l.args, vec![id("A"), pred("Line", vec![id("B"), id("C")])]);
    }

    #[test]
    fn triangle() {
        let l = parse_literal("Triangle(A, B, C)").unwrap();
        assert_eq!(l, Literal::new("Triangle", vec![id("A"), id("B"), id("C")]));
    }

    #[test]
    fn equals_with_linear_expression() {
        let l = parse_literal("Equals(LengthOf(Line(A,B)), 2x+1)").unwrap();
        // hand-built tree for 2·x + 1
        let rhs = Term::Op(
            ArithOp::Add,
            Box::new(Term::Op(ArithOp::Mul, Box::new(Term::Num(2.0)), Box::new(id("x")))),
            Box::new(Term::Num(1.0)),
        );
        let lhs = pred("LengthOf", vec![pred("Line", vec![id("A"), id("B")])]);
        assert_eq!(l, Literal::new("Equals", vec![lhs, rhs]));
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(
            parse_literal("Triangle( A ,B,  C )").unwrap(),
            parse_literal("Triangle(A,B,C)").unwrap()
        );
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_literal("Triangl(A, B, C)"),
            Err(LiteralError::UnknownPredicate("Triangl".into()))
        );
        assert!(matches!(parse_literal("Triangle(A, B)"), Err(LiteralError::Arity { .. })));
        assert!(matches!(parse_literal("Triangle(A, B, C"), Err(LiteralError::Syntax { .. })));
        assert!(matches!(parse_literal("Line(A, Frob(B))"), Err(LiteralError::UnknownPredicate(_))));
        assert!(parse_literal("").is_err());
    }

    #[test]
    fn numeric_angle_label() {
        let l = parse_literal("Find(MeasureOf(Angle(2)))").unwrap();
        let inner = l.args[0].as_pred().unwrap().args[0].as_pred().unwrap();
        assert_eq!(inner.args, vec![Term::Num(2.0)]);
    }

    const SAMPLE: &str = r#"{
        "id": "p1",
        "text_literals": ["Triangle(A, B, C)", "Equals(MeasureOf(Angle(A, B, C)), 40)", "Find(MeasureOf(Angle(B, C, A)))"],
        "diagram_literals": ["Line(A, B)", "Line(B, C)", "Line(A, C)", "Equals(MeasureOf(Angle(B, A, C)), 60)", "PointLiesOnLine(D, Line(A, C))"],
        "point_coords": {"A": [0, 0], "B": [4, 0], "C": [1, 3], "D": [0.5, 1.5]},
        "choices": [40, 60, 80, 100],
        "answer_index": 2
    }"#;

    #[test]
    fn problem_file_counts() {
        let p = parse_problem(SAMPLE).unwrap();
        assert_eq!((p.text_literals.len(), p.diagram_literals.len()), (3, 5));
        assert_eq!(p.choices, [40.0, 60.0, 80.0, 100.0]);
        assert_eq!(p.answer_index, Some(2));
    }

    #[test]
    fn problem_file_missing_choices() {
        let doc = SAMPLE.replace(r#""choices": [40, 60, 80, 100],"#, "");
        assert!(matches!(parse_problem(&doc), Err(ProblemError::Validation(_))));
    }

    #[test]
    fn problem_file_lists_every_bad_literal() {
        let doc = SAMPLE
            .replace("Line(A, B)", "Lin(A, B)")
            .replace("Line(B, C)\"", "Line(B)\"");
        match parse_problem(&doc) {
            Err(ProblemError::Validation(errs)) => assert_eq!(errs.len(), 2, "{errs:?}"),
            other => panic!("{other:?}"),
        }
    }

    fn arb_term(depth: u32) -> BoxedStrategy<Term> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|n| Term::Num(n as f64 / 4.0)),
            "[A-Z][a-z]?".prop_map(Term::Ident),
        ];
        if depth == 0 {
            return leaf.boxed();
        }
        let sub = arb_term(depth - 1);
        prop_oneof![
            leaf,
            (sub.clone(), sub.clone(), prop::sample::select(vec![ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div, ArithOp::Pow]))
                .prop_map(|(a, b, op)| Term::Op(op, Box::new(a), Box::new(b))),
            sub.clone().prop_map(|a| Term::Neg(Box::new(a))),
            (sub.clone(), sub).prop_map(|(a, b)| pred("Line", vec![a, b])),
        ]
        .boxed()
    }

    fn arb_literal() -> impl Strategy<Value = Literal> {
        (prop::sample::select(vec!["Equals", "Parallel", "Congruent"]), arb_term(3), arb_term(3))
            .prop_map(|(n, a, b)| Literal::new(n, vec![a, b]))
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(l in arb_literal()) {
            let printed = l.to_string();
            prop_assert_eq!(parse_literal(&printed).unwrap(), l, "{}", printed);
        }

        #[test]
        fn arity_mutations_rejected(extra in 1usize..3, drop in prop::bool::ANY) {
            let base = Literal::new("Triangle", vec![id("A"), id("B"), id("C")]);
            let mut args = base.args.clone();
            if drop {
                args.truncate(3 - extra);
            } else {
                args.extend((0..extra).map(|i| id(&format!("P{i}"))));
            }
            let mutated = Literal::new("Triangle", args).to_string();
            let is_arity_error = matches!(parse_literal(&mutated), Err(LiteralError::Arity { .. }));
            prop_assert!(is_arity_error);
        }
    }
}
