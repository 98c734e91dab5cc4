//! Scalar expressions of the spatial coordinates `x1`, `x2`, `x3`.
//!
//! Problem configs carry coefficient functions, sources and boundary data as
//! text. This module parses that text into an immutable tree and evaluates it
//! at points.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-2^2` is
//! `-4` and `2^3^2` is `512`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Highest coordinate index accepted by the parser (`x3`).
pub const MAX_VARIABLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Function {
    Sin,
    Cos,
    Tan,
    Atan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
}

impl Function {
    const ALL: [Function; 9] = [
        Function::Sin,
        Function::Cos,
        Function::Tan,
        Function::Atan,
        Function::Exp,
        Function::Log,
        Function::Sqrt,
        Function::Abs,
        Function::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Atan => "atan",
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
            Function::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, v: f64) -> Result<f64> {
        match self {
            Function::Sin => Ok(v.sin()),
            Function::Cos => Ok(v.cos()),
            Function::Tan => Ok(v.tan()),
            Function::Atan => Ok(v.atan()),
            Function::Exp => Ok(v.exp()),
            Function::Log if v <= 0.0 => Err(Error::Domain(format!("log of non-positive value {v}"))),
            Function::Log => Ok(v.ln()),
            Function::Sqrt if v < 0.0 => Err(Error::Domain(format!("sqrt of negative value {v}"))),
            Function::Sqrt => Ok(v.sqrt()),
            Function::Abs => Ok(v.abs()),
            Function::Tanh => Ok(v.tanh()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Constant(f64),
    /// Zero-based coordinate index: `x1` is `Variable(0)`.
    Variable(usize),
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Function, Box<Node>),
}

impl Node {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = match self {
            Node::Constant(c) => *c,
            Node::Variable(i) => *x.get(*i).ok_or(Error::VariableOutOfRange {
                index: i + 1,
                dim: x.len(),
            })?,
            Node::Neg(inner) => -inner.eval(x)?,
            Node::Binary(op, lhs, rhs) => {
                let a = lhs.eval(x)?;
                let b = rhs.eval(x)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div if b == 0.0 => {
                        return Err(Error::Domain(format!("division by zero ({a} / 0)")))
                    }
                    BinaryOp::Div => a / b,
                    BinaryOp::Pow => a.powf(b),
                }
            }
            Node::Call(f, arg) => f.apply(arg.eval(x)?)?,
        };
        if v.is_nan() {
            return Err(Error::Domain(format!("`{self}` is not a number")));
        }
        if v.is_infinite() {
            return Err(Error::Domain(format!("`{self}` overflows")));
        }
        Ok(v)
    }

    fn max_variable(&self) -> Option<usize> {
        match self {
            Node::Constant(_) => None,
            Node::Variable(i) => Some(*i),
            Node::Neg(inner) | Node::Call(_, inner) => inner.max_variable(),
            Node::Binary(_, a, b) => a.max_variable().max(b.max_variable()),
        }
    }
}

// Fully parenthesized so that re-parsing rebuilds the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Constant(c) if c.is_sign_negative() => write!(f, "(-{:?})", -c),
            Node::Constant(c) => write!(f, "{c:?}"),
            Node::Variable(i) => write!(f, "x{}", i + 1),
            Node::Neg(inner) => write!(f, "(-{inner})"),
            Node::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Node::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// A parsed scalar expression. Immutable; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        Parser::new(source).parse()
    }

    pub fn constant(value: f64) -> Self {
        Expression {
            root: Node::Constant(value),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// `self + other` as a new addition node.
    pub fn add(&self, other: &Expression) -> Expression {
        Expression {
            root: Node::Binary(
                BinaryOp::Add,
                Box::new(self.root.clone()),
                Box::new(other.root.clone()),
            ),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.root.eval(x)
    }

    /// Number of coordinates the expression reads (1 for `x1`, 0 for a constant).
    pub fn arity(&self) -> usize {
        self.root.max_variable().map_or(0, |i| i + 1)
    }

    /// The value if the expression does not depend on any coordinate.
    pub fn as_constant(&self) -> Option<f64> {
        match self.arity() {
            0 => self.evaluate(&[]).ok(),
            _ => None,
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl FromStr for Expression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expression::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(v) => format!("number {v}"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::End => "end of input".to_string(),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            b',' => Some(Token::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((tok, start));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                } else {
                    return Err(Error::Syntax {
                        offset: i,
                        message: "exponent has no digits".into(),
                    });
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            if !value.is_finite() {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("number `{text}` is out of range"),
                });
            }
            out.push((Token::Number(value), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Token::Ident(src[start..i].to_string()), start));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(Error::Syntax {
                offset: start,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    out.push((Token::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            tokens: Vec::new(),
            pos: 0,
        }
    }

    fn parse(mut self) -> Result<Expression> {
        self.tokens = tokenize(self.src)?;
        let root = self.expr()?;
        match self.peek() {
            Token::End => Ok(Expression { root }),
            tok => Err(self.unexpected(tok.clone())),
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Token, usize) {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, tok: Token) -> Error {
        Error::Syntax {
            offset: self.offset(),
            message: format!("unexpected {}", tok.describe()),
        }
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.offset(),
                message: format!("expected {}, found {}", want.describe(), self.peek().describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Node> {
        if *self.peek() == Token::Minus {
            self.bump();
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Node::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let (tok, offset) = self.bump();
        match tok {
            Token::Number(v) => Ok(Node::Constant(v)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Token::Ident(name) => self.identifier(name, offset),
            other => {
                self.pos -= usize::from(other != Token::End);
                Err(self.unexpected(other))
            }
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Node> {
        if let Some(func) = Function::from_name(&name) {
            if *self.peek() != Token::LParen {
                return Err(Error::Arity {
                    name,
                    offset,
                    found: 0,
                });
            }
            self.bump();
            let mut args = Vec::new();
            if *self.peek() != Token::RParen {
                args.push(self.expr()?);
                while *self.peek() == Token::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
            }
            self.expect(Token::RParen)?;
            if args.len() != 1 {
                return Err(Error::Arity {
                    name,
                    offset,
                    found: args.len(),
                });
            }
            let arg = args.pop().expect("one argument");
            return Ok(Node::Call(func, Box::new(arg)));
        }
        let node = if name == "pi" {
            Node::Constant(std::f64::consts::PI)
        } else if let Some(index) = variable_index(&name) {
            Node::Variable(index)
        } else {
            return Err(Error::UnknownIdentifier { name, offset });
        };
        if *self.peek() == Token::LParen {
            return Err(Error::Syntax {
                offset: self.offset(),
                message: format!("`{name}` is not a function"),
            });
        }
        Ok(node)
    }
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    match digits.parse::<usize>() {
        Ok(n) if (1..=MAX_VARIABLES).contains(&n) && !digits.starts_with('0') => Some(n - 1),
        _ => None,
    }
}
