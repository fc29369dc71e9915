//! A small expression language for metric components and vector fields.
//!
//! Expressions are parsed against a fixed list of coordinate names, evaluated
//! in IEEE double precision and differentiated symbolically with constant
//! folding. Second derivatives are obtained by differentiating twice.

mod diff;
mod eval;
mod parse;
mod print;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use parse::{parse, FUNCTIONS};

/// Byte offsets `[start, end)` into the parsed input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn join(self, other: SourceSpan) -> Self {
        Self::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl std::fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Atan,
    Sqrt,
    Exp,
    Log,
    Abs,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Atan => "atan",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Const(f64),
    /// Coordinate reference; `index` is the position in the chart's coordinate list.
    Var { index: usize, name: Arc<str> },
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Expression tree node. Nodes produced by differentiation carry the span of
/// the source node they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("parse error at {span}: {message}")]
    Parse { span: SourceSpan, message: String },
    #[error("unknown identifier `{name}` at {span}")]
    UnknownIdentifier { name: String, span: SourceSpan },
    #[error("evaluation error at {span}: {message}")]
    Eval { span: SourceSpan, message: String },
    #[error("cannot differentiate with respect to `{var}`: exponent at {span} depends on it")]
    DifferentiationUnsupported { var: String, span: SourceSpan },
    #[error("variable `{0}` is not bound")]
    Unbound(String),
}

impl DslError {
    pub fn span(&self) -> Option<SourceSpan> {
        match self {
            DslError::Parse { span, .. }
            | DslError::UnknownIdentifier { span, .. }
            | DslError::Eval { span, .. }
            | DslError::DifferentiationUnsupported { span, .. } => Some(*span),
            DslError::Unbound(_) => None,
        }
    }
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Self { kind: ExprKind::Const(value), span: SourceSpan::default() }
    }

    pub fn var(index: usize, name: &str) -> Self {
        Self {
            kind: ExprKind::Var { index, name: Arc::from(name) },
            span: SourceSpan::default(),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.kind {
            ExprKind::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_const(&self, value: f64) -> bool {
        self.as_const() == Some(value)
    }

    /// True if the expression references coordinate `index`.
    pub fn depends_on(&self, index: usize) -> bool {
        match &self.kind {
            ExprKind::Const(_) => false,
            ExprKind::Var { index: i, .. } => *i == index,
            ExprKind::Unary(_, a) => a.depends_on(index),
            ExprKind::Binary(_, a, b) => a.depends_on(index) || b.depends_on(index),
        }
    }

    /// True if the expression contains no variables at all.
    pub fn is_closed(&self) -> bool {
        match &self.kind {
            ExprKind::Const(_) => true,
            ExprKind::Var { .. } => false,
            ExprKind::Unary(_, a) => a.is_closed(),
            ExprKind::Binary(_, a, b) => a.is_closed() && b.is_closed(),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match &self.kind {
            ExprKind::Const(_) | ExprKind::Var { .. } => 1,
            ExprKind::Unary(_, a) => 1 + a.size(),
            ExprKind::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}
