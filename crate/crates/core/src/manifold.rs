//! Chart-defined Riemannian metrics: evaluation, Levi-Civita connection,
//! curvature and the curvature operators built from it.
//!
//! Curvature convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, so that
//! `⟨R(X,Y)Y,X⟩ > 0` on the round sphere.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dsl::{self, Expr};
use crate::error::{Error, Result};
use crate::jet::{DerivativeMode, Source, SymbolicFamily};
use crate::linalg;

/// Leading minors at or below this are treated as degenerate.
pub const MINOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub x: DVector<f64>,
}

impl ChartPoint {
    pub fn new(coords: &[f64]) -> Self {
        Self { x: DVector::from_column_slice(coords) }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.x.as_slice()
    }
}

impl From<Vec<f64>> for ChartPoint {
    fn from(v: Vec<f64>) -> Self {
        Self { x: DVector::from_vec(v) }
    }
}

/// A tangent vector in the coordinate basis at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: ChartPoint,
    pub comp: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: &ChartPoint, comp: &[f64]) -> Self {
        Self { base: base.clone(), comp: DVector::from_column_slice(comp) }
    }

    pub fn from_vector(base: &ChartPoint, comp: DVector<f64>) -> Self {
        Self { base: base.clone(), comp }
    }
}

type GuardFn = dyn Fn(&[f64]) -> Option<String> + Send + Sync;

/// Predicate restricting the admissible chart points. Returns a reason on rejection.
#[derive(Clone)]
pub struct DomainGuard {
    pub description: String,
    check: Arc<GuardFn>,
}

impl DomainGuard {
    pub fn new(description: impl Into<String>, check: impl Fn(&[f64]) -> Option<String> + Send + Sync + 'static) -> Self {
        Self { description: description.into(), check: Arc::new(check) }
    }

    pub fn check(&self, x: &[f64]) -> Option<String> {
        (self.check)(x)
    }
}

impl fmt::Debug for DomainGuard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainGuard").field("description", &self.description).finish()
    }
}

/// Riemannian metric on a single coordinate chart.
#[derive(Debug, Clone)]
pub struct ChartMetric {
    coords: Vec<String>,
    // upper triangle, row-major: (0,0),(0,1),..,(0,d-1),(1,1),..
    source: Source,
    guard: Option<DomainGuard>,
}

fn tri_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows 0..i hold d, d-1, .., d-i+1 entries
    i * d - i * i.saturating_sub(1) / 2 + (j - i)
}

impl ChartMetric {
    /// Metric from a full `d×d` table of expressions; the table must be
    /// symmetric (compared after parsing).
    pub fn symbolic<S: AsRef<str>>(coords: &[S], components: &[Vec<String>]) -> Result<Self> {
        let d = coords.len();
        if components.len() != d || components.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension { expected: d, got: components.len() });
        }
        let mut upper = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                let a = dsl::parse(&components[i][j], coords)?;
                if i != j {
                    let b = dsl::parse(&components[j][i], coords)?;
                    if a.to_string() != b.to_string() {
                        return Err(Error::NotSymmetric(i, j));
                    }
                }
                upper.push(a);
            }
        }
        Self::from_upper_exprs(coords, upper)
    }

    /// Diagonal metric `Σ diag[i] (dx^i)^2`.
    pub fn diagonal<S: AsRef<str>>(coords: &[S], diag: &[&str]) -> Result<Self> {
        let d = coords.len();
        if diag.len() != d {
            return Err(Error::Dimension { expected: d, got: diag.len() });
        }
        let table: Vec<Vec<String>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { diag[i].to_string() } else { "0".to_string() }).collect())
            .collect();
        Self::symbolic(coords, &table)
    }

    fn from_upper_exprs<S: AsRef<str>>(coords: &[S], upper: Vec<Expr>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Dimension { expected: 2, got: coords.len() });
        }
        let family = SymbolicFamily::from_exprs(coords, upper)?;
        Ok(Self {
            coords: coords.iter().map(|c| c.as_ref().to_string()).collect(),
            source: Source::Symbolic(Arc::new(family)),
            guard: None,
        })
    }

    /// Metric given numerically; derivatives by central differences.
    pub fn numeric<S: AsRef<str>>(
        coords: &[S],
        g: impl Fn(&[f64]) -> std::result::Result<DMatrix<f64>, String> + Send + Sync + 'static,
    ) -> Result<Self> {
        let d = coords.len();
        if d < 2 {
            return Err(Error::Dimension { expected: 2, got: d });
        }
        let f = move |x: &[f64]| -> std::result::Result<Vec<f64>, String> {
            let m = g(x)?;
            if m.nrows() != d || m.ncols() != d {
                return Err(format!("metric closure returned {}x{}", m.nrows(), m.ncols()));
            }
            let mut out = Vec::with_capacity(d * (d + 1) / 2);
            for i in 0..d {
                for j in i..d {
                    out.push(m[(i, j)]);
                }
            }
            Ok(out)
        };
        Ok(Self {
            coords: coords.iter().map(|c| c.as_ref().to_string()).collect(),
            source: Source::Numeric { outputs: d * (d + 1) / 2, f: Arc::new(f) },
            guard: None,
        })
    }

    pub fn with_guard(mut self, guard: DomainGuard) -> Self {
        self.guard = Some(guard);
        self
    }

    pub fn guard(&self) -> Option<&DomainGuard> {
        self.guard.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.source.mode()
    }

    /// Component expressions (analytic metrics only).
    pub fn component_expr(&self, i: usize, j: usize) -> Option<&Expr> {
        match &self.source {
            Source::Symbolic(s) => Some(&s.exprs[tri_index(self.dim(), i, j)]),
            Source::Numeric { .. } => None,
        }
    }

    pub fn check_domain(&self, x: &ChartPoint) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.dim() });
        }
        if let Some(bad) = x.x.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain { point: x.x.as_slice().to_vec(), reason: format!("non-finite coordinate {bad}") });
        }
        if let Some(guard) = &self.guard {
            if let Some(reason) = guard.check(x.as_slice()) {
                return Err(Error::Domain { point: x.x.as_slice().to_vec(), reason });
            }
        }
        Ok(())
    }

    fn unpack(&self, upper: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut g = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = upper[tri_index(d, i, j)];
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Largest relative mismatch between analytic first partials and
    /// central differences at `x` (0 for numeric metrics).
    pub fn partials_discrepancy(&self, x: &ChartPoint) -> Result<f64> {
        self.check_domain(x)?;
        match &self.source {
            Source::Symbolic(_) => self.source.check_partials(x.as_slice()),
            Source::Numeric { .. } => Ok(0.0),
        }
    }
}

fn check_positive(g: &DMatrix<f64>) -> Result<()> {
    for (index, value) in linalg::leading_minors(g).into_iter().enumerate() {
        if !(value > MINOR_FLOOR) {
            return Err(Error::DegenerateMetric { index: index + 1, value });
        }
    }
    Ok(())
}

/// Evaluates `[g_ij(x)]`.
pub fn metric_at(m: &ChartMetric, x: &ChartPoint) -> Result<DMatrix<f64>> {
    m.check_domain(x)?;
    let g = m.unpack(&m.source.values(x.as_slice())?);
    check_positive(&g)?;
    Ok(g)
}

/// Christoffel symbols `Γ^k_ij`, stored `[k][i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    /// `Γ(X,Y)^k = Γ^k_ij X^i Y^j`.
    pub fn contract(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |k, _| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += self.get(k, i, j) * x[i] * y[j];
                }
            }
            s
        })
    }

    /// Matrix `M^k_i = Γ^k_ij u^j`, i.e. `M·X = Γ(X,u)`.
    pub fn with_fiber(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |k, i| (0..d).map(|j| self.get(k, i, j) * u[j]).sum())
    }
}

/// Curvature tensor `R^l_{ijk}` with `R(∂_i,∂_j)∂_k = R^l_{ijk} ∂_l`, and its
/// lowered form `R_{lijk} = ⟨R(∂_i,∂_j)∂_k, ∂_l⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    pub dim: usize,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

impl Riemann {
    #[inline]
    fn idx(&self, l: usize, i: usize, j: usize, k: usize) -> usize {
        ((l * self.dim + i) * self.dim + j) * self.dim + k
    }

    pub fn up(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        self.up[self.idx(l, i, j, k)]
    }

    pub fn down(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        self.down[self.idx(l, i, j, k)]
    }

    /// The vector `R(X,Y)Z`.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |l, _| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let xy = x[i] * y[j];
                    if xy == 0.0 {
                        continue;
                    }
                    for k in 0..d {
                        s += self.up(l, i, j, k) * xy * z[k];
                    }
                }
            }
            s
        })
    }

    /// `⟨R(X,Y)Z, W⟩`.
    pub fn form(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let c = w[l] * x[i] * y[j];
                    if c == 0.0 {
                        continue;
                    }
                    for k in 0..d {
                        s += self.down(l, i, j, k) * c * z[k];
                    }
                }
            }
        }
        s
    }

    /// Largest violation of the algebraic symmetries of the lowered tensor:
    /// antisymmetry in each pair, pair symmetry and the first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let r = self.down(l, i, j, k);
                        // ⟨R(i,j)k,l⟩ = R(l,i,j,k): antisymmetric in (i,j) and (k,l)
                        worst = worst.max((r + self.down(l, j, i, k)).abs());
                        worst = worst.max((r + self.down(k, i, j, l)).abs());
                        worst = worst.max((r - self.down(j, k, l, i)).abs());
                        let bianchi = r + self.down(l, j, k, i) + self.down(l, k, i, j);
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Metric, connection and (optionally) curvature at one chart point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub dim: usize,
    pub x: ChartPoint,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `dg[k] = ∂_k g`
    pub dg: Vec<DMatrix<f64>>,
    pub gamma: Christoffel,
    /// `dgamma[m] = ∂_m Γ`; empty unless built with curvature.
    pub dgamma: Vec<Christoffel>,
    pub riemann: Option<Riemann>,
}

impl PointGeometry {
    /// Metric and Christoffel symbols only.
    pub fn connection(m: &ChartMetric, x: &ChartPoint) -> Result<Self> {
        Self::build(m, x, false)
    }

    /// Also computes `∂Γ` and the curvature tensor.
    pub fn full(m: &ChartMetric, x: &ChartPoint) -> Result<Self> {
        Self::build(m, x, true)
    }

    fn build(m: &ChartMetric, x: &ChartPoint, curvature: bool) -> Result<Self> {
        m.check_domain(x)?;
        let d = m.dim();
        let jet = m.source.jet(x.as_slice(), if curvature { 2 } else { 1 })?;
        let g = m.unpack(&jet.value);
        check_positive(&g)?;
        let g_inv = g.clone().try_inverse().ok_or(Error::DegenerateMetric { index: d, value: g.determinant() })?;
        let outputs = jet.outputs;
        let dg: Vec<DMatrix<f64>> = (0..d)
            .map(|k| {
                let upper: Vec<f64> = (0..outputs).map(|o| jet.d1(o, k)).collect();
                m.unpack(&upper)
            })
            .collect();

        // Γ^k_ij = ½ g^{kl} (∂_i g_lj + ∂_j g_li − ∂_l g_ij)
        let mut first_kind = vec![0.0; d * d * d]; // [l][i][j]
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    first_kind[(l * d + i) * d + j] = 0.5 * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
            }
        }
        let mut gamma = Christoffel::zeros(d);
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let v: f64 = (0..d).map(|l| g_inv[(k, l)] * first_kind[(l * d + i) * d + j]).sum();
                    gamma.set(k, i, j, v);
                    gamma.set(k, j, i, v);
                }
            }
        }

        let mut geo = Self { dim: d, x: x.clone(), g, g_inv, dg, gamma, dgamma: Vec::new(), riemann: None };
        if curvature {
            geo.dgamma = geo.christoffel_derivatives(&first_kind, |o, k, l| jet.d2(o, k, l), m);
            geo.riemann = Some(geo.riemann_tensor());
        }
        Ok(geo)
    }

    fn christoffel_derivatives(
        &self,
        first_kind: &[f64],
        d2: impl Fn(usize, usize, usize) -> f64,
        m: &ChartMetric,
    ) -> Vec<Christoffel> {
        let d = self.dim;
        let outputs = d * (d + 1) / 2;
        (0..d)
            .map(|mm| {
                // ∂_m g and ∂_m∂_k g as matrices
                let ddg: Vec<DMatrix<f64>> = (0..d)
                    .map(|k| {
                        let upper: Vec<f64> = (0..outputs).map(|o| d2(o, mm, k)).collect();
                        m.unpack(&upper)
                    })
                    .collect();
                // ∂_m g^{-1} = −g^{-1} (∂_m g) g^{-1}
                let dinv = -(&self.g_inv * &self.dg[mm] * &self.g_inv);
                let mut out = Christoffel::zeros(d);
                for k in 0..d {
                    for i in 0..d {
                        for j in i..d {
                            let mut v = 0.0;
                            for l in 0..d {
                                let dfirst = 0.5 * (ddg[i][(l, j)] + ddg[j][(l, i)] - ddg[l][(i, j)]);
                                v += dinv[(k, l)] * first_kind[(l * d + i) * d + j] + self.g_inv[(k, l)] * dfirst;
                            }
                            out.set(k, i, j, v);
                            out.set(k, j, i, v);
                        }
                    }
                }
                out
            })
            .collect()
    }

    fn riemann_tensor(&self) -> Riemann {
        let d = self.dim;
        let n4 = d * d * d * d;
        let mut up = vec![0.0; n4];
        let gm = &self.gamma;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let mut v = self.dgamma[i].get(l, j, k) - self.dgamma[j].get(l, i, k);
                        for m in 0..d {
                            v += gm.get(l, i, m) * gm.get(m, j, k) - gm.get(l, j, m) * gm.get(m, i, k);
                        }
                        up[((l * d + i) * d + j) * d + k] = v;
                    }
                }
            }
        }
        let mut down = vec![0.0; n4];
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        down[((l * d + i) * d + j) * d + k] =
                            (0..d).map(|m| self.g[(l, m)] * up[((m * d + i) * d + j) * d + k]).sum();
                    }
                }
            }
        }
        Riemann { dim: d, up, down }
    }

    pub fn riemann(&self) -> &Riemann {
        self.riemann.as_ref().expect("PointGeometry built without curvature")
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        linalg::inner(&self.g, a, b)
    }

    pub fn norm(&self, a: &DVector<f64>) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Largest `|∂_k g_ij − Γ^l_ki g_lj − Γ^l_kj g_il|`.
    pub fn compatibility_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut r = self.dg[k][(i, j)];
                    for l in 0..d {
                        r -= self.gamma.get(l, k, i) * self.g[(l, j)] + self.gamma.get(l, k, j) * self.g[(i, l)];
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }

    /// Sectional curvature of the plane spanned by `x`, `y`.
    pub fn sectional(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        let denom = self.inner(x, x) * self.inner(y, y) - self.inner(x, y).powi(2);
        if denom < 1e-12 {
            return Err(Error::DegeneratePlane(denom));
        }
        Ok(self.riemann().form(x, y, y, x) / denom)
    }
}

/// Christoffel symbols at `x`.
pub fn christoffel(m: &ChartMetric, x: &ChartPoint) -> Result<Christoffel> {
    Ok(PointGeometry::connection(m, x)?.gamma)
}

/// Curvature tensor at `x`.
pub fn curvature_tensor(m: &ChartMetric, x: &ChartPoint) -> Result<Riemann> {
    Ok(PointGeometry::full(m, x)?.riemann.expect("curvature requested"))
}

fn same_base(a: &TangentVector, b: &TangentVector) -> Result<()> {
    if a.base != b.base {
        return Err(Error::Domain {
            point: b.base.x.as_slice().to_vec(),
            reason: "tangent vectors are attached to different points".into(),
        });
    }
    Ok(())
}

/// `⟨R(X,Y)Y,X⟩ / (|X|²|Y|² − ⟨X,Y⟩²)`.
pub fn sectional_curvature(m: &ChartMetric, x: &TangentVector, y: &TangentVector) -> Result<f64> {
    same_base(x, y)?;
    PointGeometry::full(m, &x.base)?.sectional(&x.comp, &y.comp)
}

/// Normal Jacobi operator `X ↦ R(X,ξ)ξ` restricted to `ξ^⊥`.
#[derive(Debug, Clone)]
pub struct JacobiOperator {
    /// Coordinate components of the orthonormal basis of `ξ^⊥` (columns).
    pub basis: DMatrix<f64>,
    /// Symmetric matrix of the operator in `basis`.
    pub matrix: DMatrix<f64>,
    /// Eigenvalues, descending.
    pub eigenvalues: DVector<f64>,
    /// Eigenvectors in coordinate components (columns), matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

pub(crate) fn jacobi_from_geometry(geo: &PointGeometry, xi: &DVector<f64>) -> Result<JacobiOperator> {
    let frame = linalg::orthonormal_completion(&geo.g, std::slice::from_ref(xi), 1e-10)?;
    let n = geo.dim - 1;
    let basis = frame.columns(1, n).clone_owned();
    let riem = geo.riemann();
    let cols: Vec<DVector<f64>> = (0..n).map(|a| basis.column(a).clone_owned()).collect();
    let mut matrix = DMatrix::zeros(n, n);
    for a in 0..n {
        let image = riem.apply(&cols[a], xi, xi);
        for b in 0..n {
            matrix[(b, a)] = geo.inner(&image, &cols[b]);
        }
    }
    let (eigenvalues, vecs) = linalg::sym_eigen_desc(&matrix);
    let eigenvectors = &basis * &vecs;
    Ok(JacobiOperator { basis, matrix, eigenvalues, eigenvectors })
}

/// Jacobi operator of the unit vector `xi`; its eigenvalues are the sectional
/// curvatures of the planes `ξ ∧ e_σ`.
pub fn jacobi_operator(m: &ChartMetric, xi: &TangentVector) -> Result<JacobiOperator> {
    let geo = PointGeometry::full(m, &xi.base)?;
    let norm = geo.norm(&xi.comp);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit(norm));
    }
    jacobi_from_geometry(&geo, &xi.comp)
}

/// Gram–Schmidt with respect to `g(x)`, completed deterministically with
/// coordinate directions (smallest index first).
pub fn orthonormal_completion(m: &ChartMetric, x: &ChartPoint, vectors: &[TangentVector]) -> Result<Vec<TangentVector>> {
    let g = metric_at(m, x)?;
    let comps: Vec<DVector<f64>> = vectors.iter().map(|v| v.comp.clone()).collect();
    let frame = linalg::orthonormal_completion(&g, &comps, 1e-10)?;
    Ok(frame.column_iter().map(|c| TangentVector::from_vector(x, c.clone_owned())).collect())
}
