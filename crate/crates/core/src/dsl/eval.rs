use std::collections::HashMap;

use super::{BinaryOp, DslError, Expr, ExprKind, UnaryOp};

fn eval_err(e: &Expr, message: &str) -> DslError {
    DslError::Eval { span: e.span, message: message.to_string() }
}

impl Expr {
    /// Evaluates with coordinates bound positionally (`vars[i]` is coordinate `i`).
    pub fn eval(&self, vars: &[f64]) -> Result<f64, DslError> {
        let v = match &self.kind {
            ExprKind::Const(c) => *c,
            ExprKind::Var { index, name } => {
                *vars.get(*index).ok_or_else(|| DslError::Unbound(name.to_string()))?
            }
            ExprKind::Unary(op, a) => {
                let x = a.eval(vars)?;
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Tan => x.tan(),
                    UnaryOp::Atan => x.atan(),
                    UnaryOp::Sqrt => {
                        if x < 0.0 {
                            return Err(eval_err(self, "sqrt of negative value"));
                        }
                        x.sqrt()
                    }
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Log => {
                        if x <= 0.0 {
                            return Err(eval_err(self, "log of non-positive value"));
                        }
                        x.ln()
                    }
                    UnaryOp::Abs => x.abs(),
                }
            }
            ExprKind::Binary(op, a, b) => {
                let x = a.eval(vars)?;
                let y = b.eval(vars)?;
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y == 0.0 {
                            return Err(eval_err(self, "division by zero"));
                        }
                        x / y
                    }
                    BinaryOp::Pow => pow(x, y),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else if v.is_nan() {
            Err(eval_err(self, "result is not a number"))
        } else {
            Err(eval_err(self, "result overflows"))
        }
    }

    /// Evaluates with coordinates bound by name.
    pub fn eval_map(&self, point: &HashMap<String, f64>) -> Result<f64, DslError> {
        let mut vars = Vec::new();
        self.bind(point, &mut vars)?;
        self.eval(&vars)
    }

    fn bind(&self, point: &HashMap<String, f64>, vars: &mut Vec<f64>) -> Result<(), DslError> {
        match &self.kind {
            ExprKind::Const(_) => Ok(()),
            ExprKind::Var { index, name } => {
                let v = *point.get(name.as_ref()).ok_or_else(|| DslError::Unbound(name.to_string()))?;
                if vars.len() <= *index {
                    vars.resize(*index + 1, f64::NAN);
                }
                vars[*index] = v;
                Ok(())
            }
            ExprKind::Unary(_, a) => a.bind(point, vars),
            ExprKind::Binary(_, a, b) => {
                a.bind(point, vars)?;
                b.bind(point, vars)
            }
        }
    }
}

/// `powi` for small integral exponents keeps negative bases valid.
pub(super) fn pow(x: f64, y: f64) -> f64 {
    if y.fract() == 0.0 && y.abs() <= 64.0 {
        x.powi(y as i32)
    } else {
        x.powf(y)
    }
}
