//! A small term language for string diagrams.
//!
//! ```text
//! expr   := term (';' term)*
//! term   := factor ('*' factor)*
//! factor := 'dagger' '(' expr ')' | NAME '[' args ']' | NAME | '(' expr ')'
//! ```
//!
//! `a ; b` runs `a` first, so it denotes `b ∘ a`. `a * b` is the tensor
//! product. Space arguments take a trailing `*` for the dual, as in `cup[H*]`.
//!
//! A diagram file is a sequence of lines:
//!
//! ```text
//! # comment
//! system torus OMEGA N | system lattice OMEGA N | system real OMEGA_UV OMEGA_IR N
//! state NAME = delta|plane|basis|classical POINT
//! let NAME = expr
//! check LHS == RHS [up_to_scalar]
//! ```
//!
//! `system` binds the space `H` and the algebras `Z` (copy) and `X` (group);
//! `I` is always bound to the monoidal unit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frobenius::FrobeniusAlgebra;
use crate::groups::LatticePoint;
use crate::hilb::{compact_structure, swap, Morphism, TruncatedSpace};
use crate::report::{fit_scalar, CheckReport};
use crate::systems::{make_lattice_system, make_real_system, make_torus_system, QuantumSystem};

/// A space argument, `H` or `H*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceRef {
    pub name: String,
    pub dual: bool,
}

impl SpaceRef {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            dual: false,
        }
    }

    pub fn dual(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            dual: true,
        }
    }
}

impl fmt::Display for SpaceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, if self.dual { "*" } else { "" })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagramExpr {
    Id(SpaceRef),
    Cup(SpaceRef),
    Cap(SpaceRef),
    Swap(SpaceRef, SpaceRef),
    Mult(String),
    Unit(String),
    Comult(String),
    Counit(String),
    State(String),
    Effect(String),
    Dagger(Box<DiagramExpr>),
    Seq(Box<DiagramExpr>, Box<DiagramExpr>),
    Par(Box<DiagramExpr>, Box<DiagramExpr>),
    Named(String),
}

impl DiagramExpr {
    pub fn seq(a: DiagramExpr, b: DiagramExpr) -> Self {
        DiagramExpr::Seq(Box::new(a), Box::new(b))
    }

    pub fn par(a: DiagramExpr, b: DiagramExpr) -> Self {
        DiagramExpr::Par(Box::new(a), Box::new(b))
    }

    pub fn dagger(a: DiagramExpr) -> Self {
        DiagramExpr::Dagger(Box::new(a))
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        use DiagramExpr::*;
        match self {
            Seq(a, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 0)?;
                f.write_str(" ; ")?;
                b.fmt_prec(f, 1)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Par(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1)?;
                f.write_str(" * ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Dagger(a) => {
                f.write_str("dagger(")?;
                a.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Id(s) => write!(f, "id[{s}]"),
            Cup(s) => write!(f, "cup[{s}]"),
            Cap(s) => write!(f, "cap[{s}]"),
            Swap(a, b) => write!(f, "swap[{a}, {b}]"),
            Mult(a) => write!(f, "mult[{a}]"),
            Unit(a) => write!(f, "unit[{a}]"),
            Comult(a) => write!(f, "comult[{a}]"),
            Counit(a) => write!(f, "counit[{a}]"),
            State(a) => write!(f, "state[{a}]"),
            Effect(a) => write!(f, "effect[{a}]"),
            Named(a) => f.write_str(a),
        }
    }
}

/// Canonical form: minimal parentheses, `" ; "` and `" * "` separators.
impl fmt::Display for DiagramExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl FromStr for DiagramExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LBrack,
    RBrack,
    LParen,
    RParen,
    Semi,
    Star,
    Comma,
    Eof,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::LBrack => "[".into(),
            Tok::RBrack => "]".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Semi => ";".into(),
            Tok::Star => "*".into(),
            Tok::Comma => ",".into(),
            Tok::Eof => "<end of input>".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str, line0: usize, col0: usize) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let (mut line, mut column) = (line0, col0);
    let mut chars = text.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let (l, c) = (line, column);
        if ch == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if ch.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        let tok = match ch {
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ';' => Tok::Semi,
            '*' => Tok::Star,
            ',' => Tok::Comma,
            first if first.is_alphabetic() || first == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                        column += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    tok: Tok::Ident(name),
                    line: l,
                    column: c,
                });
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    line: l,
                    column: c,
                    token: other.to_string(),
                    message: "unexpected character".into(),
                })
            }
        };
        chars.next();
        column += 1;
        out.push(Token { tok, line: l, column: c });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

const SPACE_GENERATORS: [&str; 4] = ["id", "cup", "cap", "swap"];
const NAME_GENERATORS: [&str; 6] = ["mult", "unit", "comult", "counit", "state", "effect"];

fn is_keyword(name: &str) -> bool {
    name == "dagger" || SPACE_GENERATORS.contains(&name) || NAME_GENERATORS.contains(&name)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(t: &Token, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: t.line,
            column: t.column,
            token: t.tok.text(),
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, opener: Option<&Token>) -> Result<()> {
        let t = self.next();
        if t.tok == tok {
            return Ok(());
        }
        match opener {
            Some(o) if t.tok == Tok::Eof => Err(Self::error(o, format!("unclosed {}", o.tok.text()))),
            _ => Err(Self::error(&t, format!("expected {}", tok.text()))),
        }
    }

    fn expr(&mut self) -> Result<DiagramExpr> {
        let mut e = self.term()?;
        while self.peek().tok == Tok::Semi {
            self.next();
            e = DiagramExpr::seq(e, self.term()?);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<DiagramExpr> {
        let mut e = self.factor()?;
        while self.peek().tok == Tok::Star {
            self.next();
            e = DiagramExpr::par(e, self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<DiagramExpr> {
        let t = self.next();
        match &t.tok {
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, Some(&t))?;
                Ok(e)
            }
            Tok::Ident(name) if name == "dagger" => {
                let open = self.next();
                if open.tok != Tok::LParen {
                    return Err(Self::error(&open, "expected ( after dagger"));
                }
                let e = self.expr()?;
                self.expect(Tok::RParen, Some(&open))?;
                Ok(DiagramExpr::dagger(e))
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LBrack {
                    let open = self.next();
                    self.generator(&t, name, &open)
                } else if is_keyword(name) {
                    Err(Self::error(self.peek(), format!("expected [ after {name}")))
                } else {
                    Ok(DiagramExpr::Named(name.clone()))
                }
            }
            _ => Err(Self::error(&t, "expected a generator, a name, or (")),
        }
    }

    fn space_arg(&mut self, open: &Token) -> Result<SpaceRef> {
        let t = self.next();
        let name = match t.tok {
            Tok::Ident(name) => name,
            Tok::Eof => return Err(Self::error(open, "unclosed [")),
            _ => return Err(Self::error(&t, "expected a space name")),
        };
        if self.peek().tok == Tok::Star {
            self.next();
            Ok(SpaceRef::dual(name))
        } else {
            Ok(SpaceRef::new(name))
        }
    }

    fn name_arg(&mut self, open: &Token) -> Result<String> {
        let t = self.next();
        match t.tok {
            Tok::Ident(name) => Ok(name),
            Tok::Eof => Err(Self::error(open, "unclosed [")),
            _ => Err(Self::error(&t, "expected a name")),
        }
    }

    fn generator(&mut self, at: &Token, name: &str, open: &Token) -> Result<DiagramExpr> {
        use DiagramExpr::*;
        let e = match name {
            "id" => Id(self.space_arg(open)?),
            "cup" => Cup(self.space_arg(open)?),
            "cap" => Cap(self.space_arg(open)?),
            "swap" => {
                let a = self.space_arg(open)?;
                self.expect(Tok::Comma, Some(open))?;
                Swap(a, self.space_arg(open)?)
            }
            "mult" => Mult(self.name_arg(open)?),
            "unit" => Unit(self.name_arg(open)?),
            "comult" => Comult(self.name_arg(open)?),
            "counit" => Counit(self.name_arg(open)?),
            "state" => State(self.name_arg(open)?),
            "effect" => Effect(self.name_arg(open)?),
            _ => {
                return Err(Error::UnknownGenerator {
                    name: name.to_string(),
                    line: at.line,
                    column: at.column,
                })
            }
        };
        self.expect(Tok::RBrack, Some(open))?;
        Ok(e)
    }
}

/// Parses one expression.
pub fn parse(text: &str) -> Result<DiagramExpr> {
    parse_at(text, 1, 1)
}

/// Parses one expression whose first character sits at `(line, column)`.
pub fn parse_at(text: &str, line: usize, column: usize) -> Result<DiagramExpr> {
    let mut p = Parser {
        tokens: lex(text, line, column)?,
        pos: 0,
    };
    let e = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::Eof {
        return Err(Parser::error(t, "unexpected token"));
    }
    Ok(e)
}

/// Name bindings for evaluation.
#[derive(Debug, Clone)]
pub struct Environment {
    spaces: BTreeMap<String, TruncatedSpace>,
    algebras: BTreeMap<String, FrobeniusAlgebra>,
    states: BTreeMap<String, Morphism>,
    morphisms: BTreeMap<String, Morphism>,
}

impl Default for Environment {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment {
    /// An environment binding only `I`.
    pub fn new() -> Self {
        let mut spaces = BTreeMap::new();
        spaces.insert("I".to_string(), TruncatedSpace::unit());
        Self {
            spaces,
            algebras: BTreeMap::new(),
            states: BTreeMap::new(),
            morphisms: BTreeMap::new(),
        }
    }

    /// Binds `H`, `Z` and `X` for a quantum system.
    pub fn for_system(sys: &QuantumSystem) -> Self {
        let mut env = Self::new();
        env.bind_space("H", sys.space().clone());
        env.bind_algebra("Z", sys.z_alg().clone());
        env.bind_algebra("X", sys.x_alg().clone());
        env
    }

    pub fn bind_space(&mut self, name: impl Into<String>, space: TruncatedSpace) {
        self.spaces.insert(name.into(), space);
    }

    pub fn bind_algebra(&mut self, name: impl Into<String>, alg: FrobeniusAlgebra) {
        self.algebras.insert(name.into(), alg);
    }

    /// Binds a state `I -> H`.
    pub fn bind_state(&mut self, name: impl Into<String>, state: Morphism) -> Result<()> {
        if !state.source().is_unit() {
            return Err(Error::TypeMismatch {
                expected: "I".into(),
                found: state.source().describe(),
            });
        }
        self.states.insert(name.into(), state);
        Ok(())
    }

    pub fn bind_morphism(&mut self, name: impl Into<String>, f: Morphism) {
        self.morphisms.insert(name.into(), f);
    }

    fn space(&self, r: &SpaceRef) -> Result<TruncatedSpace> {
        let s = self
            .spaces
            .get(&r.name)
            .ok_or_else(|| Error::UnboundName(r.name.clone()))?;
        Ok(if r.dual { s.dual() } else { s.clone() })
    }

    fn algebra(&self, name: &str) -> Result<&FrobeniusAlgebra> {
        self.algebras
            .get(name)
            .ok_or_else(|| Error::UnboundName(name.to_string()))
    }

    fn state(&self, name: &str) -> Result<&Morphism> {
        self.states
            .get(name)
            .ok_or_else(|| Error::UnboundName(name.to_string()))
    }

    fn morphism(&self, name: &str) -> Result<&Morphism> {
        self.morphisms
            .get(name)
            .ok_or_else(|| Error::UnboundName(name.to_string()))
    }
}

/// Source and target of a well-typed expression.
pub fn type_of(expr: &DiagramExpr, env: &Environment) -> Result<(TruncatedSpace, TruncatedSpace)> {
    use DiagramExpr::*;
    let unit = TruncatedSpace::unit;
    Ok(match expr {
        Id(s) => {
            let h = env.space(s)?;
            (h.clone(), h)
        }
        Cup(s) => {
            let h = env.space(s)?;
            (unit(), h.tensor(&h.dual()))
        }
        Cap(s) => {
            let h = env.space(s)?;
            (h.dual().tensor(&h), unit())
        }
        Swap(a, b) => {
            let (h, k) = (env.space(a)?, env.space(b)?);
            (h.tensor(&k), k.tensor(&h))
        }
        Mult(a) => {
            let h = env.algebra(a)?.space().clone();
            (h.tensor(&h), h)
        }
        Unit(a) => (unit(), env.algebra(a)?.space().clone()),
        Comult(a) => {
            let h = env.algebra(a)?.space().clone();
            (h.clone(), h.tensor(&h))
        }
        Counit(a) => (env.algebra(a)?.space().clone(), unit()),
        State(a) => (unit(), env.state(a)?.target().clone()),
        Effect(a) => (env.state(a)?.target().clone(), unit()),
        Named(a) => {
            let f = env.morphism(a)?;
            (f.source().clone(), f.target().clone())
        }
        Dagger(a) => {
            let (s, t) = type_of(a, env)?;
            (t, s)
        }
        Seq(a, b) => {
            let (s, mid) = type_of(a, env)?;
            let (mid2, t) = type_of(b, env)?;
            if mid != mid2 {
                return Err(Error::TypeMismatch {
                    expected: mid2.describe(),
                    found: mid.describe(),
                });
            }
            (s, t)
        }
        Par(a, b) => {
            let (s1, t1) = type_of(a, env)?;
            let (s2, t2) = type_of(b, env)?;
            (s1.tensor(&s2), t1.tensor(&t2))
        }
    })
}

fn eval(expr: &DiagramExpr, env: &Environment) -> Result<Morphism> {
    use DiagramExpr::*;
    Ok(match expr {
        Id(s) => Morphism::identity(&env.space(s)?),
        Cup(s) => compact_structure(&env.space(s)?).cup,
        Cap(s) => compact_structure(&env.space(s)?).cap,
        Swap(a, b) => swap(&env.space(a)?, &env.space(b)?),
        Mult(a) => env.algebra(a)?.mult().clone(),
        Unit(a) => env.algebra(a)?.unit().clone(),
        Comult(a) => env.algebra(a)?.comult(),
        Counit(a) => env.algebra(a)?.counit(),
        State(a) => env.state(a)?.clone(),
        Effect(a) => env.state(a)?.dagger(),
        Named(a) => env.morphism(a)?.clone(),
        Dagger(a) => eval(a, env)?.dagger(),
        Seq(a, b) => eval(b, env)?.after(&eval(a, env)?)?,
        Par(a, b) => eval(a, env)?.tensor(&eval(b, env)?),
    })
}

/// Type-checks, then evaluates `expr` as a morphism.
pub fn evaluate(expr: &DiagramExpr, env: &Environment) -> Result<Morphism> {
    type_of(expr, env)?;
    eval(expr, env)
}

/// Compares two diagrams, optionally up to a fitted scalar.
pub fn check_equal(
    lhs: &DiagramExpr,
    rhs: &DiagramExpr,
    env: &Environment,
    tol: f64,
    up_to_scalar: bool,
) -> Result<CheckReport> {
    let (ls, lt) = type_of(lhs, env)?;
    let (rs, rt) = type_of(rhs, env)?;
    if ls != rs || lt != rt {
        return Err(Error::TypeMismatch {
            expected: format!("{} -> {}", ls.describe(), lt.describe()),
            found: format!("{} -> {}", rs.describe(), rt.describe()),
        });
    }
    let l = eval(lhs, env)?;
    let r = eval(rhs, env)?;
    let name = format!("{lhs} == {rhs}");
    Ok(if up_to_scalar {
        let (c, residual) = fit_scalar(l.matrix(), r.matrix());
        CheckReport::leaf(name, residual, tol).with_scalar(c)
    } else {
        CheckReport::leaf(name, l.matrix().max_abs_diff(r.matrix()), tol)
    })
}

fn syntax(line: usize, column: usize, token: &str, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        token: token.to_string(),
        message: message.into(),
    }
}

fn column_of(line: &str, part: &str) -> usize {
    part.as_ptr() as usize - line.as_ptr() as usize + 1
}

fn parse_number<T: FromStr>(line_no: usize, line: &str, word: &str) -> Result<T> {
    word.parse()
        .map_err(|_| syntax(line_no, column_of(line, word), word, "expected a number"))
}

fn parse_system(line_no: usize, line: &str, words: &[&str]) -> Result<QuantumSystem> {
    let arity = |k: usize| {
        if words.len() == k {
            Ok(())
        } else {
            Err(syntax(line_no, 1, line.trim(), format!("expected {} parameters", k - 2)))
        }
    };
    match words.get(1).copied() {
        Some("torus") => {
            arity(4)?;
            make_torus_system(parse_number(line_no, line, words[2])?, parse_number(line_no, line, words[3])?)
        }
        Some("lattice") => {
            arity(4)?;
            make_lattice_system(parse_number(line_no, line, words[2])?, parse_number(line_no, line, words[3])?)
        }
        Some("real") => {
            arity(5)?;
            make_real_system(
                parse_number(line_no, line, words[2])?,
                parse_number(line_no, line, words[3])?,
                parse_number(line_no, line, words[4])?,
            )
        }
        Some(other) => Err(syntax(line_no, column_of(line, other), other, "expected torus, lattice or real")),
        None => Err(syntax(line_no, line.len() + 1, "", "expected a system flavor")),
    }
}

/// Splits `NAME = rest` after a directive keyword.
fn binding<'a>(line_no: usize, line: &'a str, rest: &'a str) -> Result<(&'a str, &'a str)> {
    let (name, value) = rest
        .split_once('=')
        .ok_or_else(|| syntax(line_no, column_of(line, rest), rest.trim(), "expected NAME = ..."))?;
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') || is_keyword(name) {
        return Err(syntax(line_no, column_of(line, rest), name, "bad binding name"));
    }
    Ok((name, value))
}

/// Runs a diagram file, returning one report per `check` line.
pub fn run_diagram(text: &str, tol: f64) -> Result<Vec<CheckReport>> {
    let mut env = Environment::new();
    let mut system: Option<QuantumSystem> = None;
    let mut reports = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (keyword, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        match keyword {
            "system" => {
                let words: Vec<&str> = trimmed.split_whitespace().collect();
                let sys = parse_system(line_no, line, &words)?;
                env.bind_space("H", sys.space().clone());
                env.bind_algebra("Z", sys.z_alg().clone());
                env.bind_algebra("X", sys.x_alg().clone());
                system = Some(sys);
            }
            "state" => {
                let sys = system
                    .as_ref()
                    .ok_or_else(|| syntax(line_no, 1, "state", "state before system"))?;
                let (name, value) = binding(line_no, line, rest)?;
                let words: Vec<&str> = value.split_whitespace().collect();
                if words.len() != 2 {
                    return Err(syntax(line_no, column_of(line, value), value.trim(), "expected KIND POINT"));
                }
                let point: LatticePoint = words[1]
                    .parse()
                    .map_err(|_| syntax(line_no, column_of(line, words[1]), words[1], "expected a point"))?;
                let v = match words[0] {
                    "delta" => sys.delta_state(&point)?,
                    "plane" => sys.plane_wave_state(&point)?,
                    "basis" => sys.basis_state(&point)?,
                    "classical" => sys.classical_state(&point)?,
                    other => {
                        return Err(syntax(
                            line_no,
                            column_of(line, words[0]),
                            other,
                            "expected delta, plane, basis or classical",
                        ))
                    }
                };
                env.bind_state(name, Morphism::state(sys.space(), &v)?)?;
            }
            "let" => {
                let (name, value) = binding(line_no, line, rest)?;
                let e = parse_at(value, line_no, column_of(line, value))?;
                env.bind_morphism(name, evaluate(&e, &env)?);
            }
            "check" => {
                let (lhs, rhs) = rest
                    .split_once("==")
                    .ok_or_else(|| syntax(line_no, column_of(line, rest), rest.trim(), "expected LHS == RHS"))?;
                let (rhs, up_to_scalar) = match rhs.trim_end().strip_suffix("up_to_scalar") {
                    Some(r) => (r, true),
                    None => (rhs, false),
                };
                let l = parse_at(lhs, line_no, column_of(line, lhs))?;
                let r = parse_at(rhs, line_no, column_of(line, rhs))?;
                let mut report = check_equal(&l, &r, &env, tol, up_to_scalar)?;
                report.name = format!("line {line_no:03}: {}", report.name);
                reports.push(report);
            }
            other => return Err(syntax(line_no, column_of(line, other), other, "unknown directive")),
        }
    }
    Ok(reports)
}
