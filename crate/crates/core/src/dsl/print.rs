use std::fmt;

use super::{BinaryOp, Expr, ExprKind, UnaryOp};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Const(c) if c.is_sign_negative() => NEG,
        ExprKind::Const(_) | ExprKind::Var { .. } => ATOM,
        ExprKind::Unary(UnaryOp::Neg, _) => NEG,
        ExprKind::Unary(..) => ATOM,
        ExprKind::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => ADD,
        ExprKind::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => MUL,
        ExprKind::Binary(BinaryOp::Pow, ..) => POW,
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Precedence-aware printing that re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Const(c) => {
                if *c == 0.0 {
                    // -0 would otherwise print as "-0"
                    write!(f, "0")
                } else {
                    write!(f, "{c}")
                }
            }
            ExprKind::Var { name, .. } => write!(f, "{name}"),
            ExprKind::Unary(UnaryOp::Neg, a) => {
                write!(f, "-")?;
                child(f, a, NEG)
            }
            ExprKind::Unary(op, a) => write!(f, "{}({a})", op.name()),
            ExprKind::Binary(op, a, b) => {
                let (sym, lmin, rmin) = match op {
                    BinaryOp::Add => ("+", ADD, ADD + 1),
                    BinaryOp::Sub => ("-", ADD, ADD + 1),
                    BinaryOp::Mul => ("*", MUL, MUL + 1),
                    BinaryOp::Div => ("/", MUL, MUL + 1),
                    BinaryOp::Pow => ("^", ATOM, NEG),
                };
                child(f, a, lmin)?;
                write!(f, "{sym}")?;
                child(f, b, rmin)
            }
        }
    }
}
