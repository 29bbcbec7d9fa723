//! A tiny arithmetic language for forcings, boundary data and exact
//! solutions: `+ - * / ^`, `sin`, `cos`, `exp`, `pi`, literals and the
//! coordinates `x`, `y`, `z`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message} at column {}", .position + 1)]
pub struct ParseError {
    /// Zero-based character offset into the source.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("`{expr}` is not finite at {point:?}")]
    Domain { expr: String, point: Vec<f64> },
    #[error("`{expr}` uses coordinate {name} but the point has {len} coordinates")]
    MissingCoordinate { expr: String, name: char, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    node: Node,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
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
            let value = text
                .parse()
                .map_err(|_| ParseError { position: start, message: format!("malformed number `{text}`") })?;
            toks.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if "+-*/^()".contains(c) {
            toks.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ParseError { position: i, message: format!("unexpected character `{c}`") });
        }
    }
    toks.push((Tok::End, chars.len()));
    Ok(toks)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { position: self.pos(), message: message.into() })
    }

    fn eat(&mut self, op: char) -> bool {
        if *self.peek() == Tok::Op(op) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Op(c @ ('+' | '-')) => *c,
                _ => return Ok(lhs),
            };
            self.at += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op(c @ ('*' | '/')) => *c,
                _ => return Ok(lhs),
            };
            self.at += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    // Unary minus binds looser than `^`: -x^2 = -(x^2).
    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Node::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let start = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.at += 1;
                Ok(Node::Num(v))
            }
            Tok::Op('(') => {
                self.at += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return self.error("expected `)`");
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.at += 1;
                let func = match name.as_str() {
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "x" => return Ok(Node::Var(0)),
                    "y" => return Ok(Node::Var(1)),
                    "z" => return Ok(Node::Var(2)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => return Err(ParseError { position: start, message: format!("unknown name `{name}`") }),
                };
                if !self.eat('(') {
                    return self.error(format!("expected `(` after `{name}`"));
                }
                let arg = self.sum()?;
                if !self.eat(')') {
                    return self.error("expected `)`");
                }
                Ok(Node::Call(func, Box::new(arg)))
            }
            Tok::End => self.error("unexpected end of expression"),
            Tok::Op(c) => self.error(format!("unexpected `{c}`")),
        }
    }
}

fn eval_node(node: &Node, p: &[f64]) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var(k) => p[*k],
        Node::Neg(a) => -eval_node(a, p),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval_node(a, p), eval_node(b, p));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => a.powf(b),
            }
        }
        Node::Call(f, a) => {
            let a = eval_node(a, p);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
            }
        }
    }
}

fn max_var(node: &Node) -> Option<usize> {
    match node {
        Node::Num(_) => None,
        Node::Var(k) => Some(*k),
        Node::Neg(a) | Node::Call(_, a) => max_var(a),
        Node::Bin(_, a, b) => max_var(a).max(max_var(b)),
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr, ParseError> {
        let mut parser = Parser { toks: lex(source)?, at: 0 };
        let node = parser.sum()?;
        if *parser.peek() != Tok::End {
            return parser.error("unexpected trailing input");
        }
        Ok(Expr { source: source.trim().to_string(), node })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Number of coordinates the expression needs (0 for constants).
    pub fn arity(&self) -> usize {
        max_var(&self.node).map_or(0, |k| k + 1)
    }

    /// Whether the expression is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        self.node == Node::Num(0.0)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        if self.arity() > point.len() {
            let name = ['x', 'y', 'z'][self.arity() - 1];
            return Err(EvalError::MissingCoordinate { expr: self.source.clone(), name, len: point.len() });
        }
        let v = eval_node(&self.node, point);
        if !v.is_finite() {
            return Err(EvalError::Domain { expr: self.source.clone(), point: point.to_vec() });
        }
        Ok(v)
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Infallible sampling closure for grid projections; the first evaluation
/// error is kept and must be checked with [`Sampler::finish`].
pub struct Sampler<'a> {
    expr: &'a Expr,
    error: std::cell::RefCell<Option<EvalError>>,
}

impl<'a> Sampler<'a> {
    pub fn new(expr: &'a Expr) -> Self {
        Sampler { expr, error: std::cell::RefCell::new(None) }
    }

    pub fn sample(&self, p: &[f64]) -> f64 {
        match self.expr.eval(p) {
            Ok(v) => v,
            Err(e) => {
                self.error.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    }

    pub fn finish(self) -> Result<(), EvalError> {
        match self.error.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}
