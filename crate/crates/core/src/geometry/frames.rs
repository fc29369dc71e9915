//! Singular frames of the shape operator and the adapted frames of `ξ(M)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bundle::{horizontal_lift_at, vertical_lift_at, BundlePoint, BundleTangent};
use crate::error::{Error, Result};
use crate::field::FieldGeometry;
use crate::linalg;

/// Singular values at or below this (relative to the largest, floor 1) count as zero.
pub const KERNEL_TOL: f64 = 1e-8;
/// Allowed asymmetry of `A_ξ` on `ξ^⊥` in signed mode.
pub const SELF_ADJOINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameMode {
    /// Singular value decomposition, `λ_1 ≥ … ≥ λ_n ≥ 0`.
    Unsigned,
    /// Eigen-decomposition on `ξ^⊥`, `f_α = e_α`, `λ_α = k_α` of either sign.
    Signed,
}

/// Orthonormal frames with `A e_i = λ_i f_i`, `A* f_i = λ_i e_i`, `λ_0 = 0`.
///
/// Columns are expressed in whatever orthonormal basis the input matrix uses.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularFrameSet {
    pub e: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub lambda: DVector<f64>,
    pub signed: bool,
}

impl SingularFrameSet {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Largest violation of `A e_i = λ_i f_i` and `Aᵀ f_i = λ_i e_i`.
    pub fn relation_residual(&self, a: &DMatrix<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            let e = self.e.column(i);
            let f = self.f.column(i);
            worst = worst.max((a * e - f * self.lambda[i]).amax());
            worst = worst.max((a.transpose() * f - e * self.lambda[i]).amax());
        }
        worst
    }

    /// Largest deviation of `eᵀe` and `fᵀf` from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.dim();
        let id = DMatrix::<f64>::identity(n, n);
        let e = (self.e.transpose() * &self.e - &id).amax();
        let f = (self.f.transpose() * &self.f - &id).amax();
        e.max(f)
    }

    /// Same frames with the `α ≥ 1` entries permuted by `order`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        let n = self.dim();
        let perm: Vec<usize> = std::iter::once(0).chain(order.iter().map(|&a| a + 1)).collect();
        debug_assert_eq!(perm.len(), n);
        Self {
            e: DMatrix::from_fn(n, n, |r, c| self.e[(r, perm[c])]),
            f: DMatrix::from_fn(n, n, |r, c| self.f[(r, perm[c])]),
            lambda: DVector::from_fn(n, |i, _| self.lambda[perm[i]]),
            signed: self.signed,
        }
    }
}

/// `A*` in an orthonormal frame is the transpose.
pub fn conjugate_shape_operator(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.transpose()
}

fn unit_axis(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Orthonormalizes `start` then completes with coordinate axes (Euclidean).
fn complete(start: &[DVector<f64>], n: usize) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = start.to_vec();
    for i in 0..n {
        if out.len() == n {
            break;
        }
        let mut w = unit_axis(n, i);
        for _ in 0..2 {
            for e in &out {
                let c = e.dot(&w);
                w -= e * c;
            }
        }
        let norm = w.norm();
        if norm > 1e-10 {
            out.push(w / norm);
        }
    }
    out
}

/// Singular frames of `a` (a square matrix in an orthonormal basis).
///
/// `xi_dir`, when given, is the unit field direction: it becomes `f_0`, and
/// `e_0` is taken as the projection of `ξ` onto `ker a` when that kernel is
/// more than one-dimensional.
pub fn singular_frames(a: &DMatrix<f64>, xi_dir: Option<&DVector<f64>>, mode: FrameMode) -> Result<SingularFrameSet> {
    match mode {
        FrameMode::Unsigned => unsigned_frames(a, xi_dir),
        FrameMode::Signed => {
            let xi = xi_dir.ok_or_else(|| Error::Scenario("signed frames need the field direction".into()))?;
            signed_frames(a, xi)
        }
    }
}

fn unsigned_frames(a: &DMatrix<f64>, xi: Option<&DVector<f64>>) -> Result<SingularFrameSet> {
    let n = a.nrows();
    let (vals, vecs) = linalg::sym_eigen_desc(&(a.transpose() * a));
    let sv: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
    let tol = KERNEL_TOL * sv.first().copied().unwrap_or(0.0).max(1.0);
    let nonzero: Vec<usize> = (0..n).filter(|&i| sv[i] > tol).collect();
    let kernel: Vec<DVector<f64>> = (0..n).filter(|&i| sv[i] <= tol).map(|i| vecs.column(i).clone_owned()).collect();
    if kernel.is_empty() {
        return Err(Error::AmbiguousKernel(0));
    }

    let e0 = if kernel.len() == 1 {
        kernel[0].clone()
    } else if let Some(xi) = xi {
        let mut proj = DVector::zeros(n);
        for k in &kernel {
            proj += k * k.dot(xi);
        }
        let norm = proj.norm();
        if norm < KERNEL_TOL {
            return Err(Error::AmbiguousKernel(kernel.len()));
        }
        proj / norm
    } else {
        kernel[0].clone()
    };

    // remaining kernel directions, orthogonal to e0
    let kernel_rest: Vec<DVector<f64>> = {
        let mut basis = vec![e0.clone()];
        for k in &kernel {
            let mut w = k.clone();
            for b in &basis {
                let c = b.dot(&w);
                w -= b * c;
            }
            let norm = w.norm();
            if norm > 1e-6 && basis.len() < kernel.len() {
                basis.push(w / norm);
            }
        }
        basis.into_iter().skip(1).collect()
    };

    let mut e_cols = vec![e0];
    let mut lambda = vec![0.0];
    let mut f_image = Vec::new();
    for &i in &nonzero {
        let e = vecs.column(i).clone_owned();
        f_image.push(a * &e / sv[i]);
        e_cols.push(e);
        lambda.push(sv[i]);
    }
    for k in kernel_rest {
        e_cols.push(k);
        lambda.push(0.0);
    }

    let f0 = match xi {
        Some(x) => x.normalize(),
        None => {
            let completed = complete(&f_image, n);
            completed[f_image.len()].clone()
        }
    };
    let mut start = vec![f0];
    start.extend(f_image.iter().cloned());
    let f_all = complete(&start, n);
    // f_all = [f0, image..., completion...]; matches e order.
    Ok(SingularFrameSet {
        e: DMatrix::from_columns(&e_cols),
        f: DMatrix::from_columns(&f_all),
        lambda: DVector::from_vec(lambda),
        signed: false,
    })
}

/// Decomposes `a` in the orthonormal basis `q` whose first column is `ξ`.
fn xi_adapted(a: &DMatrix<f64>, xi: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let q = DMatrix::from_columns(&complete(&[xi.normalize()], n));
    let local = q.transpose() * a * &q;
    (q, local)
}

fn signed_frames(a: &DMatrix<f64>, xi: &DVector<f64>) -> Result<SingularFrameSet> {
    let n = a.nrows();
    let (q, local) = xi_adapted(a, xi);
    let scale = local.amax().max(1.0);
    let geodesic = local.column(0).amax();
    if geodesic > SELF_ADJOINT_TOL * scale {
        return Err(Error::NotGeodesic(geodesic));
    }
    let sub = local.view((1, 1), (n - 1, n - 1)).clone_owned();
    let asym = (&sub - sub.transpose()).amax();
    if asym > SELF_ADJOINT_TOL * scale {
        return Err(Error::NotSelfAdjoint(asym));
    }
    let (k, v) = linalg::sym_eigen_desc(&sub);
    let mut cols = vec![q.column(0).clone_owned()];
    for alpha in 0..n - 1 {
        let mut w = DVector::zeros(n);
        w.rows_mut(1, n - 1).copy_from(&v.column(alpha));
        cols.push(&q * w);
    }
    let e = DMatrix::from_columns(&cols);
    let mut lambda = DVector::zeros(n);
    lambda.rows_mut(1, n - 1).copy_from(&k);
    Ok(SingularFrameSet { f: e.clone(), e, lambda, signed: true })
}

/// Whether `a` admits signed frames with respect to `xi`, i.e. `A ξ = 0` and
/// `A` is self-adjoint on `ξ^⊥`.
pub fn admits_signed(a: &DMatrix<f64>, xi: &DVector<f64>) -> bool {
    signed_frames(a, xi).is_ok()
}

/// Shape operator `A_ξ X = −∇_X ξ` in a `g`-orthonormal frame whose first
/// vector is `ξ`.
#[derive(Debug, Clone)]
pub struct ShapeOperator {
    /// Coordinate components of the orthonormal frame (columns), `frame[:,0] = ξ`.
    pub frame: DMatrix<f64>,
    /// Matrix of `A_ξ` in `frame`.
    pub matrix: DMatrix<f64>,
}

impl ShapeOperator {
    pub(crate) fn from_field(fg: &FieldGeometry) -> Result<Self> {
        let frame = linalg::orthonormal_completion(&fg.geo.g, std::slice::from_ref(&fg.xi), 1e-10)?;
        let a_coord = -fg.cov.clone();
        let matrix = frame.transpose() * &fg.geo.g * a_coord * &frame;
        Ok(Self { frame, matrix })
    }

    /// `ξ` in frame coordinates (always the first axis).
    pub fn xi_local(&self) -> DVector<f64> {
        unit_axis(self.matrix.nrows(), 0)
    }
}

/// Singular frames in chart coordinates, together with the local data used to build them.
#[derive(Debug, Clone)]
pub struct FieldFrames {
    pub shape: ShapeOperator,
    pub local: SingularFrameSet,
    /// Coordinate components of `e_i` (columns).
    pub e: DMatrix<f64>,
    /// Coordinate components of `f_i` (columns).
    pub f: DMatrix<f64>,
}

impl FieldFrames {
    pub fn new(shape: ShapeOperator, local: SingularFrameSet) -> Self {
        let e = &shape.frame * &local.e;
        let f = &shape.frame * &local.f;
        Self { shape, local, e, f }
    }

    pub fn dim(&self) -> usize {
        self.local.dim()
    }

    pub fn lambda(&self, i: usize) -> f64 {
        self.local.lambda[i]
    }

    pub fn e(&self, i: usize) -> DVector<f64> {
        self.e.column(i).clone_owned()
    }

    pub fn f(&self, i: usize) -> DVector<f64> {
        self.f.column(i).clone_owned()
    }

    pub fn mode(&self) -> FrameMode {
        if self.local.signed {
            FrameMode::Signed
        } else {
            FrameMode::Unsigned
        }
    }
}

/// Chooses signed frames whenever they exist, unsigned otherwise.
pub(crate) fn frames_auto(fg: &FieldGeometry) -> Result<FieldFrames> {
    let shape = ShapeOperator::from_field(fg)?;
    let xi = shape.xi_local();
    let local = match signed_frames(&shape.matrix, &xi) {
        Ok(s) => s,
        Err(_) => unsigned_frames(&shape.matrix, Some(&xi))?,
    };
    Ok(FieldFrames::new(shape, local))
}

pub(crate) fn frames_with_mode(fg: &FieldGeometry, mode: FrameMode) -> Result<FieldFrames> {
    let shape = ShapeOperator::from_field(fg)?;
    let xi = shape.xi_local();
    let local = singular_frames(&shape.matrix, Some(&xi), mode)?;
    Ok(FieldFrames::new(shape, local))
}

/// Adapted frames of `ξ(M) ⊂ TM` at `(x, ξ(x))`.
#[derive(Debug, Clone)]
pub struct SubmanifoldFrames {
    /// `ẽ_i = (e_i^h − λ_i f_i^v)/√(1+λ_i²)`, `i = 0..n`.
    pub tangent: Vec<BundleTangent>,
    /// `ñ_σ = (λ_σ e_σ^h + f_σ^v)/√(1+λ_σ²)`, `σ = 1..n` (stored from index 0).
    pub normal: Vec<BundleTangent>,
}

pub(crate) fn submanifold_frames_at(fg: &FieldGeometry, frames: &FieldFrames) -> SubmanifoldFrames {
    let p = BundlePoint::new(&fg.geo.x, fg.xi.clone());
    let d = frames.dim();
    let mut tangent = Vec::with_capacity(d);
    let mut normal = Vec::with_capacity(d - 1);
    for i in 0..d {
        let lam = frames.lambda(i);
        let s = 1.0 / (1.0 + lam * lam).sqrt();
        let eh = horizontal_lift_at(&fg.geo, &p, &frames.e(i));
        let fv = vertical_lift_at(&p, &frames.f(i));
        tangent.push(BundleTangent { base: p.clone(), dx: (&eh.dx - &fv.dx * lam) * s, du: (&eh.du - &fv.du * lam) * s });
        if i > 0 {
            normal.push(BundleTangent { base: p.clone(), dx: (&eh.dx * lam + &fv.dx) * s, du: (&eh.du * lam + &fv.du) * s });
        }
    }
    SubmanifoldFrames { tangent, normal }
}
