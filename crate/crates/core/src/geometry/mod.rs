//! Second fundamental form of `ξ(M) ⊂ T₁M` for a unit vector field `ξ`:
//! the general formula in singular frames, the hyperfoliation form in terms
//! of leaf data, and the classification predicates built on them.

mod frames;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use frames::{
    admits_signed, conjugate_shape_operator, singular_frames, FieldFrames, FrameMode, ShapeOperator, SingularFrameSet,
    SubmanifoldFrames, KERNEL_TOL, SELF_ADJOINT_TOL,
};

use crate::error::{Error, Result};
use crate::field::{FieldGeometry, UnitField};
use crate::jet::fd_step1;
use crate::linalg;
use crate::manifold::{metric_at, ChartMetric, ChartPoint};

/// Largest admissible `|∇_ξ ξ|` for leaf computations.
pub const GEODESIC_TOL: f64 = 1e-8;
/// Largest admissible `|⟨[e_α, e_β], ξ⟩|` for leaf computations.
pub const INTEGRABILITY_TOL: f64 = 1e-6;
/// Spread of principal curvatures below which a leaf counts as umbilic.
pub const UMBILIC_TOL: f64 = 1e-8;
/// `|k² − 1|` below which the condition residual is undefined.
pub const POLE_TOL: f64 = 1e-8;

/// `A_ξ` at `x` in a `g`-orthonormal frame starting with `ξ`.
pub fn shape_operator(m: &ChartMetric, xi: &UnitField, x: &ChartPoint) -> Result<ShapeOperator> {
    ShapeOperator::from_field(&FieldGeometry::at(m, xi, x)?)
}

/// Singular frames of `A_ξ` at a point. With `mode = None`, signed frames
/// are used whenever `ξ` is geodesic and `A_ξ` is self-adjoint on `ξ^⊥`.
pub fn field_frames(fg: &FieldGeometry, mode: Option<FrameMode>) -> Result<FieldFrames> {
    match mode {
        None => frames::frames_auto(fg),
        Some(mode) => frames::frames_with_mode(fg, mode),
    }
}

pub fn submanifold_frames(fg: &FieldGeometry, frames: &FieldFrames) -> SubmanifoldFrames {
    frames::submanifold_frames_at(fg, frames)
}

/// Components `Ω̃_{σ|ij}` with `σ = 1..n`, `i, j = 0..n`.
#[derive(Debug, Clone)]
pub struct OmegaTensor {
    /// `values[σ-1][(i, j)]`
    pub values: Vec<DMatrix<f64>>,
    /// Frames used, in coordinate components.
    pub frame: SingularFrameSet,
    pub lambdas: DVector<f64>,
}

impl OmegaTensor {
    /// Number of normal directions `n`.
    pub fn normal_dim(&self) -> usize {
        self.values.len()
    }

    /// `Ω̃_{σ|ij}`, `σ` counted from 1.
    pub fn get(&self, sigma: usize, i: usize, j: usize) -> f64 {
        self.values[sigma - 1][(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|m| m.amax()).fold(0.0, f64::max)
    }

    /// `Σ_i Ω̃_{σ|ii}`.
    pub fn trace(&self, sigma: usize) -> f64 {
        self.values[sigma - 1].trace()
    }

    pub fn trace_norm(&self) -> f64 {
        (1..=self.normal_dim()).map(|s| self.trace(s).abs()).fold(0.0, f64::max)
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.values.iter().map(|m| (m - m.transpose()).amax()).fold(0.0, f64::max)
    }

    /// Nested `[σ-1][i][j]` arrays.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        self.values.iter().map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect()).collect()
    }

    /// Largest componentwise difference; tensors must have equal shape.
    pub fn max_difference(&self, other: &OmegaTensor) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max)
    }
}

fn lambda_factor(ls: f64, li: f64, lj: f64) -> f64 {
    1.0 / ((1.0 + ls * ls) * (1.0 + li * li) * (1.0 + lj * lj)).sqrt()
}

/// General formula in the frames `frames`.
pub fn omega_general_at(fg: &FieldGeometry, frames: &FieldFrames) -> OmegaTensor {
    let d = fg.dim();
    let riem = fg.geo.riemann();
    let e: Vec<DVector<f64>> = (0..d).map(|i| frames.e(i)).collect();
    let f: Vec<DVector<f64>> = (0..d).map(|i| frames.f(i)).collect();
    let lam = &frames.local.lambda;
    // ⟨R(e_σ, e_i)ξ, f_j⟩
    let rf = |s: usize, i: usize, j: usize| riem.form(&e[s], &e[i], &fg.xi, &f[j]);
    let values = (1..d)
        .map(|s| {
            let mut om = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in i..d {
                    let sym = fg.half(&e[i], &e[j]) + fg.half(&e[j], &e[i]);
                    let mut v = fg.geo.inner(&sym, &f[s]);
                    if lam[s] != 0.0 {
                        v += lam[s] * (lam[j] * rf(s, i, j) + lam[i] * rf(s, j, i));
                    }
                    let v = 0.5 * lambda_factor(lam[s], lam[i], lam[j]) * v;
                    om[(i, j)] = v;
                    om[(j, i)] = v;
                }
            }
            om
        })
        .collect();
    OmegaTensor {
        values,
        frame: SingularFrameSet { e: frames.e.clone(), f: frames.f.clone(), lambda: lam.clone(), signed: frames.local.signed },
        lambdas: lam.clone(),
    }
}

/// `Ω̃` at `x` by the general singular-frame formula, with automatic frame mode.
pub fn omega_general(m: &ChartMetric, xi: &UnitField, x: &ChartPoint) -> Result<OmegaTensor> {
    let fg = FieldGeometry::at(m, xi, x)?;
    let frames = field_frames(&fg, None)?;
    Ok(omega_general_at(&fg, &frames))
}

pub fn omega_general_with(m: &ChartMetric, xi: &UnitField, x: &ChartPoint, mode: FrameMode) -> Result<OmegaTensor> {
    let fg = FieldGeometry::at(m, xi, x)?;
    let frames = field_frames(&fg, Some(mode))?;
    Ok(omega_general_at(&fg, &frames))
}

/// Orthonormal frame of `ξ^⊥` at `p` from the deterministic completion.
fn perp_frame(m: &ChartMetric, xi: &UnitField, p: &ChartPoint) -> Result<DMatrix<f64>> {
    let g = metric_at(m, p)?;
    let v = xi.value(p)?;
    let frame = linalg::orthonormal_completion(&g, &[v], 1e-10)?;
    Ok(frame.columns(1, frame.ncols() - 1).clone_owned())
}

/// `max |⟨[Y_α, Y_β], ξ⟩|` over an orthonormal frame of `ξ^⊥`, with the
/// frame fields differentiated by central differences of the frame
/// construction. The value does not depend on which frame of `ξ^⊥` is used
/// at `x` (the expression is tensorial in `Y_α, Y_β`).
pub fn integrability_residual(m: &ChartMetric, xi: &UnitField, x: &ChartPoint) -> Result<f64> {
    let d = x.dim();
    if d < 3 {
        return Ok(0.0);
    }
    let g = metric_at(m, x)?;
    let xi0 = xi.value(x)?;
    let y = perp_frame(m, xi, x)?;
    let n = y.ncols();
    let mut dy = Vec::with_capacity(d);
    for k in 0..d {
        let h = fd_step1(x.x[k]);
        let mut p = x.x.clone();
        p[k] += h;
        let fp = perp_frame(m, xi, &ChartPoint { x: p.clone() })?;
        p[k] -= 2.0 * h;
        let fm = perp_frame(m, xi, &ChartPoint { x: p })?;
        dy.push((fp - fm) / (2.0 * h));
    }
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let mut bracket = DVector::zeros(d);
            for k in 0..d {
                bracket += dy[k].column(b) * y[(k, a)] - dy[k].column(a) * y[(k, b)];
            }
            worst = worst.max(linalg::inner(&g, &bracket, &xi0).abs());
        }
    }
    Ok(worst)
}

/// Leaf quantities of the hyperfoliation orthogonal to `ξ`.
#[derive(Debug, Clone)]
pub struct LeafData {
    /// Principal curvatures `k_α`, descending.
    pub principal_curvatures: DVector<f64>,
    /// Coordinate components of the leaf eigenframe `e_1..e_n` (columns).
    pub frame: DMatrix<f64>,
    /// `B_ξ(e_α, e_β) = ⟨A_ξ e_α, e_β⟩`.
    pub b: DMatrix<f64>,
    /// `nabla_b[σ-1][(α-1, β-1)] = (∇^F_{e_σ} B_ξ)(e_α, e_β)`.
    pub nabla_b: Vec<DMatrix<f64>>,
    /// `jacobi[(α-1, σ-1)] = ⟨R(e_α, ξ)ξ, e_σ⟩`.
    pub jacobi: DMatrix<f64>,
    pub integrability: f64,
    pub geodesic_defect: f64,
}

impl LeafData {
    pub fn dim(&self) -> usize {
        self.principal_curvatures.len()
    }

    /// The common principal curvature if the leaf is umbilic within `tol`.
    pub fn umbilicity(&self, tol: f64) -> Option<f64> {
        let k = &self.principal_curvatures;
        if k.is_empty() {
            return None;
        }
        (k.max() - k.min() <= tol).then(|| k.mean())
    }

    /// `|B_ξ − k·id|` in the orthonormal leaf frame, for a given `k`.
    pub fn umbilic_defect(&self, k: f64) -> f64 {
        let n = self.dim();
        (&self.b - DMatrix::identity(n, n) * k).amax()
    }
}

/// `(∇_X B̂)(Y, Z)` with `B̂(Y, Z) = ⟨A_ξ Y, Z⟩`, differentiating the
/// coordinate expression of `B̂` directly. For leaf-tangent arguments and a
/// geodesic field this is `(∇^F_X B_ξ)(Y, Z)`.
fn nabla_b(fg: &FieldGeometry, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
    let d = fg.dim();
    let g = &fg.geo.g;
    let cy = &fg.cov * y;
    let mut derivative = 0.0;
    for m in 0..d {
        if x[m] == 0.0 {
            continue;
        }
        let dcy = &fg.dcov[m] * y;
        derivative -= x[m] * (linalg::inner(&fg.geo.dg[m], &cy, z) + linalg::inner(g, &dcy, z));
    }
    let bhat = |u: &DVector<f64>, v: &DVector<f64>| linalg::inner(g, &fg.shape(u), v);
    let tangential = |w: DVector<f64>| {
        let c = fg.geo.inner(&w, &fg.xi);
        w - &fg.xi * c
    };
    let nxy = tangential(fg.geo.gamma.contract(x, y));
    let nxz = tangential(fg.geo.gamma.contract(x, z));
    derivative - bhat(&nxy, z) - bhat(y, &nxz)
}

/// Checks the leaf preconditions and builds the leaf data from `fg`.
pub fn leaf_data_at(m: &ChartMetric, xi: &UnitField, fg: &FieldGeometry) -> Result<LeafData> {
    let integrability = integrability_residual(m, xi, &fg.geo.x)?;
    if integrability > INTEGRABILITY_TOL {
        return Err(Error::NotIntegrable(integrability));
    }
    let geodesic_defect = fg.geodesic_defect();
    if geodesic_defect > GEODESIC_TOL {
        return Err(Error::NotGeodesic(geodesic_defect));
    }
    let shape = ShapeOperator::from_field(fg)?;
    let local = singular_frames(&shape.matrix, Some(&shape.xi_local()), FrameMode::Signed)?;
    let n = fg.dim() - 1;
    let all = &shape.frame * &local.e;
    let frame = all.columns(1, n).clone_owned();
    let cols: Vec<DVector<f64>> = (0..n).map(|a| frame.column(a).clone_owned()).collect();
    let b = DMatrix::from_fn(n, n, |a, c| fg.geo.inner(&fg.shape(&cols[a]), &cols[c]));
    let nabla = (0..n).map(|s| DMatrix::from_fn(n, n, |a, c| nabla_b(fg, &cols[s], &cols[a], &cols[c]))).collect();
    let riem = fg.geo.riemann();
    let jacobi = DMatrix::from_fn(n, n, |a, s| riem.form(&cols[a], &fg.xi, &fg.xi, &cols[s]));
    Ok(LeafData {
        principal_curvatures: local.lambda.rows(1, n).clone_owned(),
        frame,
        b,
        nabla_b: nabla,
        jacobi,
        integrability,
        geodesic_defect,
    })
}

pub fn leaf_data(m: &ChartMetric, xi: &UnitField, x: &ChartPoint) -> Result<LeafData> {
    let fg = FieldGeometry::at(m, xi, x)?;
    leaf_data_at(m, xi, &fg)
}

/// Hyperfoliation form of `Ω̃` from leaf data, in the frame `e_0 = ξ`,
/// `e_α` = leaf eigenframe.
pub fn omega_foliation_at(fg: &FieldGeometry, leaf: &LeafData) -> OmegaTensor {
    let n = leaf.dim();
    let d = n + 1;
    let k = &leaf.principal_curvatures;
    let riem = fg.geo.riemann();
    let cols: Vec<DVector<f64>> = (0..n).map(|a| leaf.frame.column(a).clone_owned()).collect();
    let values = (0..n)
        .map(|s| {
            let ks = k[s];
            let mut om = DMatrix::zeros(d, d);
            for a in 0..n {
                let ka = k[a];
                let bracket = if a == s {
                    (ks * ks - 1.0) * leaf.jacobi[(s, s)] - 2.0 * ks * ks
                } else {
                    -(1.0 - ka * ks) * leaf.jacobi[(a, s)]
                };
                let v = 0.5 * lambda_factor(ks, ka, 0.0) * bracket;
                om[(a + 1, 0)] = v;
                om[(0, a + 1)] = v;
                for b in a..n {
                    let kb = k[b];
                    let v = -2.0 * leaf.nabla_b[s][(a, b)]
                        + (1.0 - ks * ka) * riem.form(&fg.xi, &cols[a], &cols[b], &cols[s])
                        + (1.0 - ks * kb) * riem.form(&fg.xi, &cols[b], &cols[a], &cols[s]);
                    let v = 0.5 * lambda_factor(ks, ka, kb) * v;
                    om[(a + 1, b + 1)] = v;
                    om[(b + 1, a + 1)] = v;
                }
            }
            om
        })
        .collect();
    let mut e = DMatrix::zeros(d, d);
    e.set_column(0, &fg.xi);
    e.columns_mut(1, n).copy_from(&leaf.frame);
    let mut lambda = DVector::zeros(d);
    lambda.rows_mut(1, n).copy_from(k);
    OmegaTensor { values, frame: SingularFrameSet { f: e.clone(), e, lambda: lambda.clone(), signed: true }, lambdas: lambda }
}

pub fn omega_foliation(m: &ChartMetric, xi: &UnitField, x: &ChartPoint) -> Result<OmegaTensor> {
    let fg = FieldGeometry::at(m, xi, x)?;
    let leaf = leaf_data_at(m, xi, &fg)?;
    Ok(omega_foliation_at(&fg, &leaf))
}

/// `Ω̃_{σ|σ0}` for a totally umbilic leaf with umbilicity `k` and Jacobi
/// eigenvalues `K_σ`.
pub fn omega_umbilic(k: f64, jacobi_eigs: &[f64]) -> Vec<f64> {
    jacobi_eigs.iter().map(|&ks| ((k * k - 1.0) * ks - 2.0 * k * k) / (2.0 * (1.0 + k * k))).collect()
}

/// [`omega_umbilic`] after checking the leaf is umbilic.
pub fn omega_umbilic_leaf(leaf: &LeafData) -> Result<Vec<f64>> {
    let k = &leaf.principal_curvatures;
    let spread = if k.is_empty() { 0.0 } else { k.max() - k.min() };
    let k = leaf.umbilicity(UMBILIC_TOL).ok_or(Error::NotUmbilic(spread))?;
    let diag: Vec<f64> = leaf.jacobi.diagonal().iter().copied().collect();
    Ok(omega_umbilic(k, &diag))
}

/// `K_σ − 2k²/(k² − 1)`.
pub fn tg_condition_residual(k: f64, k_sigma: f64) -> Result<f64> {
    let k2 = k * k;
    if (k2 - 1.0).abs() <= POLE_TOL {
        return Err(Error::UmbilicityPole(k));
    }
    Ok(k_sigma - 2.0 * k2 / (k2 - 1.0))
}

/// Same expression, applied per principal direction of a curvature-adapted leaf.
pub fn curvature_adapted_residual(k_sigma: f64, big_k_sigma: f64) -> Result<f64> {
    tg_condition_residual(k_sigma, big_k_sigma)
}

/// Off-diagonal Jacobi entries (relative) above which the eigenframe of
/// `A_ξ` is not curvature adapted.
pub const ADAPTED_TOL: f64 = 1e-6;

/// Condition residual per leaf direction. Umbilic leaves use the Jacobi
/// eigenvalues directly; otherwise the Jacobi operator must be diagonal in
/// the principal frame.
pub fn curvature_adapted_residuals(leaf: &LeafData) -> Result<Vec<f64>> {
    let n = leaf.dim();
    if let Some(k) = leaf.umbilicity(UMBILIC_TOL) {
        let (eigs, _) = linalg::sym_eigen_desc(&leaf.jacobi);
        return eigs.iter().map(|&ks| tg_condition_residual(k, ks)).collect();
    }
    let scale = leaf.jacobi.amax().max(1.0);
    let mut offdiag: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                offdiag = offdiag.max(leaf.jacobi[(a, b)].abs());
            }
        }
    }
    if offdiag > ADAPTED_TOL * scale {
        let (_, vecs) = linalg::sym_eigen_desc(&leaf.jacobi);
        let jacobi_order = (0..n)
            .map(|c| {
                let col = vecs.column(c);
                (0..n).max_by(|&i, &j| col[i].abs().total_cmp(&col[j].abs())).unwrap_or(0)
            })
            .collect();
        return Err(Error::FrameMismatch { shape_order: (0..n).collect(), jacobi_order, offdiag });
    }
    (0..n).map(|a| curvature_adapted_residual(leaf.principal_curvatures[a], leaf.jacobi[(a, a)])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub totally_geodesic: bool,
    pub minimal: bool,
    pub max_abs: f64,
    pub trace_norm: f64,
}

pub fn classify(omega: &OmegaTensor, tol: f64) -> Classification {
    let max_abs = omega.max_abs();
    let trace_norm = omega.trace_norm();
    Classification { totally_geodesic: max_abs < tol, minimal: trace_norm < tol, max_abs, trace_norm }
}

/// Largest residuals of the three leaf identities over the leaf frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma3Residuals {
    /// `⟨r(X,Y)ξ,Z⟩ + (∇^F_X B)(Y,Z)`
    pub tangential: f64,
    /// `⟨r(X,ξ)ξ,Z⟩ + ⟨AX,AZ⟩`
    pub mixed: f64,
    /// `⟨r(ξ,X)ξ,Z⟩ + ⟨AX,AZ⟩ + ⟨R(X,ξ)ξ,Z⟩`
    pub transversal: f64,
}

impl Lemma3Residuals {
    pub fn max(&self) -> f64 {
        self.tangential.max(self.mixed).max(self.transversal)
    }
}

pub fn lemma3_identities_at(fg: &FieldGeometry, leaf: &LeafData) -> Lemma3Residuals {
    let n = leaf.dim();
    let cols: Vec<DVector<f64>> = (0..n).map(|a| leaf.frame.column(a).clone_owned()).collect();
    let riem = fg.geo.riemann();
    let xi = &fg.xi;
    let mut out = Lemma3Residuals { tangential: 0.0, mixed: 0.0, transversal: 0.0 };
    for a in 0..n {
        let ax = fg.shape(&cols[a]);
        let r_x_xi = fg.half(&cols[a], xi);
        let r_xi_x = fg.half(xi, &cols[a]);
        for c in 0..n {
            let z = &cols[c];
            let aa = fg.geo.inner(&ax, &fg.shape(z));
            out.mixed = out.mixed.max((fg.geo.inner(&r_x_xi, z) + aa).abs());
            let jac = riem.form(&cols[a], xi, xi, z);
            out.transversal = out.transversal.max((fg.geo.inner(&r_xi_x, z) + aa + jac).abs());
            for b in 0..n {
                let lhs = fg.geo.inner(&fg.half(&cols[a], &cols[b]), z);
                out.tangential = out.tangential.max((lhs + leaf.nabla_b[a][(b, c)]).abs());
            }
        }
    }
    out
}

pub fn lemma3_identities(m: &ChartMetric, xi: &UnitField, x: &ChartPoint) -> Result<Lemma3Residuals> {
    let fg = FieldGeometry::at(m, xi, x)?;
    let leaf = leaf_data_at(m, xi, &fg)?;
    Ok(lemma3_identities_at(&fg, &leaf))
}

#[cfg(test)]
mod tests;
