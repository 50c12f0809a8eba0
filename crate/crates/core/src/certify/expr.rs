//! A small expression language for certificate operators.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := '-' unary | atom
//! atom  := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Names: `T`, `A`, `I` (identity of the system size) and scalar
//! parameters. Functions: `adjoint(P)`, `compose(P, Q, ...)`,
//! `blockdiag(P, Q, ...)`, `I(n)`, `zero(n)`. `*` scales when either side is
//! a scalar and composes otherwise; a scalar added to an operator stands for
//! that multiple of the identity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::pi::PiOp;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Name(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

const RESERVED: [&str; 3] = ["T", "A", "I"];
const FUNCTIONS: [&str; 5] = ["adjoint", "compose", "blockdiag", "I", "zero"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse()
                .map_err(|_| Error::Expr(format!("bad number '{text}' at column {}", start + 1)))?;
            out.push((start, Tok::Num(v)));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Expr(format!("unexpected character '{c}' at column {}", i + 1)));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len) + 1
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Expr(format!("expected '{c}' at column {}", self.column())))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.column();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    if !FUNCTIONS.contains(&name.as_str()) {
                        return Err(Error::Expr(format!("unknown function '{name}' at column {col}")));
                    }
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Name(name))
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(t) => Err(Error::Expr(format!("unexpected {t:?} at column {col}"))),
            None => Err(Error::Expr(format!("unexpected end of expression at column {col}"))),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, len: src.chars().count() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Expr(format!("trailing input at column {}", p.column())));
    }
    Ok(e)
}

#[derive(Debug, Clone)]
pub enum Value {
    Scalar(f64),
    Op(PiOp),
}

impl Value {
    pub fn into_op(self) -> Result<PiOp> {
        match self {
            Value::Op(p) => Ok(p),
            Value::Scalar(v) => Err(Error::Expr(format!("expected an operator, got the scalar {v}"))),
        }
    }

    fn scalar(&self, what: &str) -> Result<f64> {
        match self {
            Value::Scalar(v) => Ok(*v),
            Value::Op(_) => Err(Error::Expr(format!("{what} must be a scalar"))),
        }
    }
}

/// Names available during evaluation.
pub struct Env<'a> {
    pub t: &'a PiOp,
    pub a: &'a PiOp,
    pub params: &'a BTreeMap<String, f64>,
}

fn add_values(x: Value, y: Value, sign: f64) -> Result<Value> {
    Ok(match (x, y) {
        (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a + sign * b),
        (Value::Op(p), Value::Op(q)) => Value::Op(if sign > 0.0 { p.add(&q)? } else { p.sub(&q)? }),
        (Value::Op(p), Value::Scalar(c)) => Value::Op(p.add(&scalar_identity(&p, sign * c)?)?),
        (Value::Scalar(c), Value::Op(q)) => {
            let q = q.scale(sign);
            Value::Op(scalar_identity(&q, c)?.add(&q)?)
        }
    })
}

fn scalar_identity(p: &PiOp, c: f64) -> Result<PiOp> {
    if !p.is_square() {
        return Err(Error::Expr("a scalar can only be added to a square operator".into()));
    }
    Ok(PiOp::identity(p.rows(), p.domain()).scale(c))
}

fn count(v: &Value, name: &str) -> Result<usize> {
    let n = v.scalar(&format!("the argument of {name}()"))?;
    if n < 1.0 || n.fract() != 0.0 {
        return Err(Error::Expr(format!("{name}() needs a positive integer, got {n}")));
    }
    Ok(n as usize)
}

impl Expr {
    pub fn eval(&self, env: &Env) -> Result<Value> {
        let d = env.t.domain();
        match self {
            Expr::Num(v) => Ok(Value::Scalar(*v)),
            Expr::Name(n) => match n.as_str() {
                "T" => Ok(Value::Op(env.t.clone())),
                "A" => Ok(Value::Op(env.a.clone())),
                "I" => Ok(Value::Op(PiOp::identity(env.t.rows(), d))),
                _ => env
                    .params
                    .get(n)
                    .map(|v| Value::Scalar(*v))
                    .ok_or_else(|| Error::Expr(format!("unbound parameter '{n}'"))),
            },
            Expr::Neg(e) => Ok(match e.eval(env)? {
                Value::Scalar(v) => Value::Scalar(-v),
                Value::Op(p) => Value::Op(p.scale(-1.0)),
            }),
            Expr::Add(x, y) => add_values(x.eval(env)?, y.eval(env)?, 1.0),
            Expr::Sub(x, y) => add_values(x.eval(env)?, y.eval(env)?, -1.0),
            Expr::Mul(x, y) => Ok(match (x.eval(env)?, y.eval(env)?) {
                (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a * b),
                (Value::Scalar(c), Value::Op(p)) | (Value::Op(p), Value::Scalar(c)) => Value::Op(p.scale(c)),
                (Value::Op(p), Value::Op(q)) => Value::Op(p.compose(&q)?),
            }),
            Expr::Call(f, args) => {
                let vals = args.iter().map(|a| a.eval(env)).collect::<Result<Vec<_>>>()?;
                let arity = |n: usize| {
                    if vals.len() == n {
                        Ok(())
                    } else {
                        Err(Error::Expr(format!("{f}() takes {n} argument(s), got {}", vals.len())))
                    }
                };
                match f.as_str() {
                    "adjoint" => {
                        arity(1)?;
                        Ok(Value::Op(vals[0].clone().into_op()?.adjoint()))
                    }
                    "compose" => {
                        let mut ops = vals.into_iter().map(Value::into_op);
                        let mut acc = ops.next().ok_or_else(|| Error::Expr("compose() of nothing".into()))??;
                        for op in ops {
                            acc = acc.compose(&op?)?;
                        }
                        Ok(Value::Op(acc))
                    }
                    "blockdiag" => {
                        let ops = vals.into_iter().map(Value::into_op).collect::<Result<Vec<_>>>()?;
                        Ok(Value::Op(PiOp::block_diag(&ops)?))
                    }
                    "I" => {
                        arity(1)?;
                        Ok(Value::Op(PiOp::identity(count(&vals[0], "I")?, d)))
                    }
                    "zero" => {
                        arity(1)?;
                        let n = count(&vals[0], "zero")?;
                        Ok(Value::Op(PiOp::zero(n, n, d)))
                    }
                    _ => Err(Error::Expr(format!("unknown function '{f}'"))),
                }
            }
        }
    }

    /// Scalar parameter names referenced by the expression.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Name(n) => {
                if !RESERVED.contains(&n.as_str()) {
                    out.insert(n.clone());
                }
            }
            Expr::Neg(e) => e.collect(out),
            Expr::Add(x, y) | Expr::Sub(x, y) | Expr::Mul(x, y) => {
                x.collect(out);
                y.collect(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect(out)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Name(n) => f.write_str(n),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Add(x, y) => write!(f, "({x} + {y})"),
            Expr::Sub(x, y) => write!(f, "({x} - {y})"),
            Expr::Mul(x, y) => write!(f, "{x} * {y}"),
            Expr::Call(n, args) => {
                write!(f, "{n}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
