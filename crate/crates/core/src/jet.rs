//! Families of scalar functions on a chart together with their first and
//! second partial derivatives, either symbolic or by central differences.

use std::fmt;
use std::sync::Arc;

use crate::dsl::Expr;
use crate::error::{Error, Result};

/// How partial derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

pub type NumericFn = dyn Fn(&[f64]) -> std::result::Result<Vec<f64>, String> + Send + Sync;

#[derive(Clone)]
pub(crate) enum Source {
    Symbolic(Arc<SymbolicFamily>),
    Numeric { outputs: usize, f: Arc<NumericFn> },
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Symbolic(s) => f.debug_tuple("Symbolic").field(&s.exprs.len()).finish(),
            Source::Numeric { outputs, .. } => f.debug_tuple("Numeric").field(outputs).finish(),
        }
    }
}

#[derive(Debug)]
pub(crate) struct SymbolicFamily {
    pub dim: usize,
    pub exprs: Vec<Expr>,
    /// `d1[o * dim + k]` = ∂_k exprs[o]
    pub d1: Vec<Expr>,
    /// `d2[(o * dim + k) * dim + l]` = ∂_k ∂_l exprs[o]
    pub d2: Vec<Expr>,
}

impl SymbolicFamily {
    pub fn from_exprs<S: AsRef<str>>(coords: &[S], exprs: Vec<Expr>) -> Result<Self> {
        let dim = coords.len();
        let mut d1 = Vec::with_capacity(exprs.len() * dim);
        let mut d2 = vec![Expr::constant(0.0); exprs.len() * dim * dim];
        for (o, e) in exprs.iter().enumerate() {
            for k in 0..dim {
                d1.push(e.differentiate_index(k, coords[k].as_ref())?);
            }
            for k in 0..dim {
                for l in k..dim {
                    let dkl = d1[o * dim + k].differentiate_index(l, coords[l].as_ref())?;
                    d2[(o * dim + l) * dim + k] = dkl.clone();
                    d2[(o * dim + k) * dim + l] = dkl;
                }
            }
        }
        Ok(Self { dim, exprs, d1, d2 })
    }
}

/// Values and partials of a function family at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub dim: usize,
    pub outputs: usize,
    pub value: Vec<f64>,
    /// Empty when order < 1.
    pub d1: Vec<f64>,
    /// Empty when order < 2.
    pub d2: Vec<f64>,
}

impl Jet {
    pub fn d1(&self, o: usize, k: usize) -> f64 {
        self.d1[o * self.dim + k]
    }

    pub fn d2(&self, o: usize, k: usize, l: usize) -> f64 {
        self.d2[(o * self.dim + k) * self.dim + l]
    }
}

fn domain(x: &[f64], reason: impl fmt::Display) -> Error {
    Error::Domain { point: x.to_vec(), reason: reason.to_string() }
}

/// Step for first central differences: cbrt(eps) scaled by the coordinate.
pub fn fd_step1(xk: f64) -> f64 {
    f64::EPSILON.cbrt() * xk.abs().max(1.0)
}

/// Step for second central differences: eps^(1/4) scaled by the coordinate.
pub fn fd_step2(xk: f64) -> f64 {
    f64::EPSILON.powf(0.25) * xk.abs().max(1.0)
}

impl Source {
    pub fn outputs(&self) -> usize {
        match self {
            Source::Symbolic(s) => s.exprs.len(),
            Source::Numeric { outputs, .. } => *outputs,
        }
    }

    pub fn mode(&self) -> DerivativeMode {
        match self {
            Source::Symbolic(_) => DerivativeMode::Analytic,
            Source::Numeric { .. } => DerivativeMode::FiniteDifference,
        }
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Source::Symbolic(s) => s.exprs.iter().map(|e| e.eval(x).map_err(|err| domain(x, err))).collect(),
            Source::Numeric { outputs, f } => {
                let v = f(x).map_err(|r| domain(x, r))?;
                if v.len() != *outputs {
                    return Err(Error::Dimension { expected: *outputs, got: v.len() });
                }
                if let Some(bad) = v.iter().find(|c| !c.is_finite()) {
                    return Err(domain(x, format!("non-finite value {bad}")));
                }
                Ok(v)
            }
        }
    }

    pub fn jet(&self, x: &[f64], order: u8) -> Result<Jet> {
        let dim = x.len();
        let outputs = self.outputs();
        let value = self.values(x)?;
        let mut jet = Jet { dim, outputs, value, d1: Vec::new(), d2: Vec::new() };
        if order == 0 {
            return Ok(jet);
        }
        match self {
            Source::Symbolic(s) => {
                debug_assert_eq!(s.dim, dim);
                jet.d1 = s.d1.iter().map(|e| e.eval(x).map_err(|err| domain(x, err))).collect::<Result<_>>()?;
                if order >= 2 {
                    jet.d2 =
                        s.d2.iter().map(|e| e.eval(x).map_err(|err| domain(x, err))).collect::<Result<_>>()?;
                }
            }
            Source::Numeric { .. } => {
                jet.d1 = vec![0.0; outputs * dim];
                let mut p = x.to_vec();
                for k in 0..dim {
                    let h = fd_step1(x[k]);
                    p[k] = x[k] + h;
                    let fp = self.values(&p)?;
                    p[k] = x[k] - h;
                    let fm = self.values(&p)?;
                    p[k] = x[k];
                    for o in 0..outputs {
                        jet.d1[o * dim + k] = (fp[o] - fm[o]) / (2.0 * h);
                    }
                }
                if order >= 2 {
                    jet.d2 = self.fd_second(x, &jet.value)?;
                }
            }
        }
        Ok(jet)
    }

    fn fd_second(&self, x: &[f64], f0: &[f64]) -> Result<Vec<f64>> {
        let dim = x.len();
        let outputs = f0.len();
        let mut d2 = vec![0.0; outputs * dim * dim];
        let mut p = x.to_vec();
        for k in 0..dim {
            let hk = fd_step2(x[k]);
            p[k] = x[k] + hk;
            let fp = self.values(&p)?;
            p[k] = x[k] - hk;
            let fm = self.values(&p)?;
            p[k] = x[k];
            for o in 0..outputs {
                d2[(o * dim + k) * dim + k] = (fp[o] - 2.0 * f0[o] + fm[o]) / (hk * hk);
            }
            for l in (k + 1)..dim {
                let hl = fd_step2(x[l]);
                let mut corner = |sk: f64, sl: f64| -> Result<Vec<f64>> {
                    p[k] = x[k] + sk * hk;
                    p[l] = x[l] + sl * hl;
                    let v = self.values(&p);
                    p[k] = x[k];
                    p[l] = x[l];
                    v
                };
                let fpp = corner(1.0, 1.0)?;
                let fpm = corner(1.0, -1.0)?;
                let fmp = corner(-1.0, 1.0)?;
                let fmm = corner(-1.0, -1.0)?;
                for o in 0..outputs {
                    let v = (fpp[o] - fpm[o] - fmp[o] + fmm[o]) / (4.0 * hk * hl);
                    d2[(o * dim + k) * dim + l] = v;
                    d2[(o * dim + l) * dim + k] = v;
                }
            }
        }
        Ok(d2)
    }

    /// Compares symbolic first partials with central differences of the
    /// values; returns the largest relative discrepancy.
    pub fn check_partials(&self, x: &[f64]) -> Result<f64> {
        let jet = self.jet(x, 1)?;
        let numeric = Source::Numeric {
            outputs: self.outputs(),
            f: {
                let me = self.clone();
                Arc::new(move |p: &[f64]| me.values(p).map_err(|e| e.to_string()))
            },
        };
        let fd = numeric.jet(x, 1)?;
        Ok(jet
            .d1
            .iter()
            .zip(&fd.d1)
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1.0))
            .fold(0.0, f64::max))
    }
}
