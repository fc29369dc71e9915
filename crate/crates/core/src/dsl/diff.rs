use super::eval::pow as fpow;
use super::{BinaryOp, DslError, Expr, ExprKind, SourceSpan, UnaryOp};

// Folding constructors. Only constant folding and 0/1 identities, nothing else.

fn node(kind: ExprKind, span: SourceSpan) -> Expr {
    Expr { kind, span }
}

fn konst(v: f64, span: SourceSpan) -> Expr {
    node(ExprKind::Const(v), span)
}

fn folded(v: f64, span: SourceSpan) -> Option<Expr> {
    v.is_finite().then(|| konst(v, span))
}

pub(crate) fn add(a: Expr, b: Expr, span: SourceSpan) -> Expr {
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if let Some(e) = folded(x + y, span) {
            return e;
        }
    }
    if a.is_const(0.0) {
        return b;
    }
    if b.is_const(0.0) {
        return a;
    }
    node(ExprKind::Binary(BinaryOp::Add, Box::new(a), Box::new(b)), span)
}

pub(crate) fn sub(a: Expr, b: Expr, span: SourceSpan) -> Expr {
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if let Some(e) = folded(x - y, span) {
            return e;
        }
    }
    if b.is_const(0.0) {
        return a;
    }
    if a.is_const(0.0) {
        return neg(b, span);
    }
    node(ExprKind::Binary(BinaryOp::Sub, Box::new(a), Box::new(b)), span)
}

pub(crate) fn mul(a: Expr, b: Expr, span: SourceSpan) -> Expr {
    if a.is_const(0.0) || b.is_const(0.0) {
        return konst(0.0, span);
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if let Some(e) = folded(x * y, span) {
            return e;
        }
    }
    if a.is_const(1.0) {
        return b;
    }
    if b.is_const(1.0) {
        return a;
    }
    if a.is_const(-1.0) {
        return neg(b, span);
    }
    if b.is_const(-1.0) {
        return neg(a, span);
    }
    node(ExprKind::Binary(BinaryOp::Mul, Box::new(a), Box::new(b)), span)
}

pub(crate) fn div(a: Expr, b: Expr, span: SourceSpan) -> Expr {
    if a.is_const(0.0) && !b.is_const(0.0) {
        return konst(0.0, span);
    }
    if b.is_const(1.0) {
        return a;
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if y != 0.0 {
            if let Some(e) = folded(x / y, span) {
                return e;
            }
        }
    }
    node(ExprKind::Binary(BinaryOp::Div, Box::new(a), Box::new(b)), span)
}

pub(crate) fn pow(a: Expr, b: Expr, span: SourceSpan) -> Expr {
    if b.is_const(0.0) {
        return konst(1.0, span);
    }
    if b.is_const(1.0) {
        return a;
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if let Some(e) = folded(fpow(x, y), span) {
            return e;
        }
    }
    node(ExprKind::Binary(BinaryOp::Pow, Box::new(a), Box::new(b)), span)
}

pub(crate) fn neg(a: Expr, span: SourceSpan) -> Expr {
    match a.kind {
        ExprKind::Const(c) => konst(-c, span),
        ExprKind::Unary(UnaryOp::Neg, inner) => *inner,
        kind => node(ExprKind::Unary(UnaryOp::Neg, Box::new(Expr { kind, span: a.span })), span),
    }
}

pub(crate) fn unary(op: UnaryOp, a: Expr, span: SourceSpan) -> Expr {
    if op == UnaryOp::Neg {
        return neg(a, span);
    }
    if let Some(x) = a.as_const() {
        let probe = Expr { kind: ExprKind::Unary(op, Box::new(konst(x, span))), span };
        if let Ok(v) = probe.eval(&[]) {
            return konst(v, span);
        }
    }
    node(ExprKind::Unary(op, Box::new(a)), span)
}

impl Expr {
    /// Symbolic partial derivative with respect to the coordinate named `var`.
    ///
    /// A name that does not occur in the expression yields the constant 0.
    pub fn differentiate(&self, var: &str) -> Result<Expr, DslError> {
        self.diff_by(&|name: &str, _| name == var, var)
    }

    /// Symbolic partial derivative with respect to coordinate `index`.
    pub fn differentiate_index(&self, index: usize, var_name: &str) -> Result<Expr, DslError> {
        self.diff_by(&|_, i| i == index, var_name)
    }

    fn mentions(&self, is_var: &dyn Fn(&str, usize) -> bool) -> bool {
        match &self.kind {
            ExprKind::Const(_) => false,
            ExprKind::Var { index, name } => is_var(name, *index),
            ExprKind::Unary(_, a) => a.mentions(is_var),
            ExprKind::Binary(_, a, b) => a.mentions(is_var) || b.mentions(is_var),
        }
    }

    fn diff_by(&self, is_var: &dyn Fn(&str, usize) -> bool, var: &str) -> Result<Expr, DslError> {
        let s = self.span;
        Ok(match &self.kind {
            ExprKind::Const(_) => konst(0.0, s),
            ExprKind::Var { index, name } => konst(if is_var(name, *index) { 1.0 } else { 0.0 }, s),
            ExprKind::Unary(op, a) => {
                let da = a.diff_by(is_var, var)?;
                if da.is_const(0.0) {
                    return Ok(konst(0.0, s));
                }
                let f = (**a).clone();
                match op {
                    UnaryOp::Neg => neg(da, s),
                    UnaryOp::Sin => mul(unary(UnaryOp::Cos, f, s), da, s),
                    UnaryOp::Cos => neg(mul(unary(UnaryOp::Sin, f, s), da, s), s),
                    UnaryOp::Tan => div(da, pow(unary(UnaryOp::Cos, f, s), konst(2.0, s), s), s),
                    UnaryOp::Atan => div(da, add(konst(1.0, s), pow(f, konst(2.0, s), s), s), s),
                    UnaryOp::Sqrt => div(da, mul(konst(2.0, s), unary(UnaryOp::Sqrt, f, s), s), s),
                    UnaryOp::Exp => mul(unary(UnaryOp::Exp, f, s), da, s),
                    UnaryOp::Log => div(da, f, s),
                    UnaryOp::Abs => mul(da, div(f.clone(), unary(UnaryOp::Abs, f, s), s), s),
                }
            }
            ExprKind::Binary(op, a, b) => {
                let (a, b) = (&**a, &**b);
                match op {
                    BinaryOp::Add => add(a.diff_by(is_var, var)?, b.diff_by(is_var, var)?, s),
                    BinaryOp::Sub => sub(a.diff_by(is_var, var)?, b.diff_by(is_var, var)?, s),
                    BinaryOp::Mul => {
                        let da = a.diff_by(is_var, var)?;
                        let db = b.diff_by(is_var, var)?;
                        add(mul(da, b.clone(), s), mul(a.clone(), db, s), s)
                    }
                    BinaryOp::Div => {
                        let da = a.diff_by(is_var, var)?;
                        let db = b.diff_by(is_var, var)?;
                        if db.is_const(0.0) {
                            div(da, b.clone(), s)
                        } else {
                            let num = sub(mul(da, b.clone(), s), mul(a.clone(), db, s), s);
                            div(num, pow(b.clone(), konst(2.0, s), s), s)
                        }
                    }
                    BinaryOp::Pow => {
                        if b.mentions(is_var) {
                            return Err(DslError::DifferentiationUnsupported {
                                var: var.to_string(),
                                span: b.span,
                            });
                        }
                        let da = a.diff_by(is_var, var)?;
                        let lowered = sub(b.clone(), konst(1.0, s), s);
                        mul(mul(b.clone(), pow(a.clone(), lowered, s), s), da, s)
                    }
                }
            }
        })
    }
}
