//! Expression language for user supplied sources `f(t, u)`.
//!
//! ```text
//! expr    := term   (('+' | '-') term)*
//! term    := unary  (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
//! VAR     := 't' | 'u'
//! FUNC    := 'sin' | 'cos' | 'exp' | 'sqrt' | 'abs'
//! NUMBER  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ```
//!
//! `^` binds tightest and is right associative, so `2^3^2 = 512` and
//! `-2^2 = -4`. There is no implicit multiplication: `2t` is rejected.

mod lexer;
mod parser;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Half-open byte range `[start, end)` into the expression source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("evaluation error at bytes {}..{} (`{snippet}`): {message}", span.start, span.end)]
pub struct EvalError {
    pub span: Span,
    pub snippet: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Number(f64),
    Var(Var),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parse-tree node. Equality is structural and ignores spans.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (NodeKind::Number(x), NodeKind::Number(y)) => x.to_bits() == y.to_bits(),
            (NodeKind::Var(x), NodeKind::Var(y)) => x == y,
            (NodeKind::Neg(x), NodeKind::Neg(y)) => x == y,
            (NodeKind::Binary(o1, l1, r1), NodeKind::Binary(o2, l2, r2)) => {
                o1 == o2 && l1 == l2 && r1 == r2
            }
            (NodeKind::Call(f1, x1), NodeKind::Call(f2, x2)) => f1 == f2 && x1 == x2,
            _ => false,
        }
    }
}

/// Parsed expression in the variables `t` and `u`. Immutable and shareable
/// across threads; evaluation is pure.
#[derive(Debug, Clone)]
pub struct Expr {
    source: Arc<str>,
    root: Node,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let root = parser::Parser::new(source)?.parse()?;
    Ok(Expr {
        source: source.into(),
        root,
    })
}

pub fn eval_expr(e: &Expr, t: f64, u: f64) -> Result<f64, EvalError> {
    e.eval(t, u)
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

impl Expr {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn uses(&self, var: Var) -> bool {
        fn walk(n: &Node, var: Var) -> bool {
            match &n.kind {
                NodeKind::Number(_) => false,
                NodeKind::Var(v) => *v == var,
                NodeKind::Neg(x) | NodeKind::Call(_, x) => walk(x, var),
                NodeKind::Binary(_, l, r) => walk(l, var) || walk(r, var),
            }
        }
        walk(&self.root, var)
    }

    pub fn eval(&self, t: f64, u: f64) -> Result<f64, EvalError> {
        self.eval_node(&self.root, t, u)
    }

    fn fail(&self, span: Span, message: impl Into<String>) -> EvalError {
        EvalError {
            span,
            snippet: self
                .source
                .get(span.start..span.end)
                .unwrap_or_default()
                .to_string(),
            message: message.into(),
        }
    }

    fn eval_node(&self, n: &Node, t: f64, u: f64) -> Result<f64, EvalError> {
        let value = match &n.kind {
            NodeKind::Number(x) => *x,
            NodeKind::Var(Var::T) => t,
            NodeKind::Var(Var::U) => u,
            NodeKind::Neg(x) => -self.eval_node(x, t, u)?,
            NodeKind::Binary(op, l, r) => {
                let x = self.eval_node(l, t, u)?;
                let y = self.eval_node(r, t, u)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(self.fail(n.span, "division by zero"));
                        }
                        x / y
                    }
                    BinOp::Pow => x.powf(y),
                }
            }
            NodeKind::Call(f, x) => {
                let x = self.eval_node(x, t, u)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Abs => x.abs(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(self.fail(n.span, "square root of a negative number"));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.fail(n.span, format!("non-finite result {value}")))
        }
    }
}

/// Fully parenthesised rendering that reparses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Number(x) => write!(f, "{x}"),
            NodeKind::Var(Var::T) => write!(f, "t"),
            NodeKind::Var(Var::U) => write!(f, "u"),
            NodeKind::Neg(x) => write!(f, "(-{x})"),
            NodeKind::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            NodeKind::Call(func, x) => write!(f, "{}({x})", func.name()),
        }
    }
}
