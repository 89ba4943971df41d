//! Analytic weight expressions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | atom
//! atom   := number | 'pi' | var | ('sin' | 'cos') '(' expr ')' | '(' expr ')'
//! var    := 'x' j | 'y' j          with 1 <= j <= n
//! ```
//!
//! Typical weights are sums of products of `sin`/`cos` of integer
//! combinations of the coordinates, e.g. `2*cos(x1) - 0.5*sin(x1 + 2*y2)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::{ScalarField, TorusGeometry};

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Number(f64),
    Axis(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
}

impl Node {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Number(v) => *v,
            Node::Axis(a) => x[*a],
            Node::Neg(a) => -a.eval(x),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Sin(a) => a.eval(x).sin(),
            Node::Cos(a) => a.eval(x).cos(),
        }
    }
}

/// A parsed weight expression in the coordinates `x_j, y_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightExpression {
    source: String,
    complex_dim: usize,
    root: Node,
}

impl WeightExpression {
    pub fn parse(source: &str, complex_dim: usize) -> Result<Self> {
        let mut parser = Parser {
            chars: source.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
            complex_dim,
        };
        let root = parser.expr()?;
        if parser.pos != parser.chars.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(Self {
            source: source.to_string(),
            complex_dim,
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluates at real coordinates `(x_1, y_1, ..., x_n, y_n)`.
    pub fn eval(&self, coords: &[f64]) -> f64 {
        self.root.eval(coords)
    }

    pub fn sample(&self, geometry: &TorusGeometry) -> Result<ScalarField> {
        if geometry.complex_dim() != self.complex_dim {
            return Err(Error::DimensionMismatch {
                expected: self.complex_dim,
                found: geometry.complex_dim(),
            });
        }
        ScalarField::from_fn(geometry, |x| self.eval(x))
    }
}

impl fmt::Display for WeightExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    complex_dim: usize,
}

impl Parser {
    fn error(&self, msg: &str) -> Error {
        Error::Expression(format!("{msg} at offset {}", self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn starts_with(&self, word: &str) -> bool {
        let w: Vec<char> = word.chars().collect();
        self.chars.get(self.pos..self.pos + w.len()) == Some(&w[..])
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(_) if self.starts_with("sin(") || self.starts_with("cos(") => {
                let is_sin = self.starts_with("sin(");
                self.pos += 4;
                let arg = Box::new(self.expr()?);
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(if is_sin {
                    Node::Sin(arg)
                } else {
                    Node::Cos(arg)
                })
            }
            Some(_) if self.starts_with("pi") => {
                self.pos += 2;
                Ok(Node::Number(std::f64::consts::PI))
            }
            Some(c @ ('x' | 'y')) => {
                self.pos += 1;
                let start = self.pos;
                while self.peek().is_some_and(|d| d.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits: String = self.chars[start..self.pos].iter().collect();
                let j: usize = digits
                    .parse()
                    .map_err(|_| self.error("expected coordinate index"))?;
                if j == 0 || j > self.complex_dim {
                    return Err(self.error(&format!(
                        "coordinate {c}{j} outside 1..={}",
                        self.complex_dim
                    )));
                }
                Ok(Node::Axis(2 * (j - 1) + usize::from(c == 'y')))
            }
            Some(c) => Err(self.error(&format!("unexpected character '{c}'"))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse()
            .map(Node::Number)
            .map_err(|_| self.error(&format!("bad number '{text}'")))
    }
}
