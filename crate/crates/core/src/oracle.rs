//! Brute-force second fundamental form of `ξ(M)` inside `TM`.
//!
//! Everything here is built from metric values on `TM` in induced
//! coordinates: the Sasaki metric matrix, its Christoffel symbols by central
//! differences, and the immersion `x ↦ (x, ξ(x))` differentiated numerically.
//! The normal frame `ñ_σ` is tangent to the unit tangent bundle, so projecting
//! ambient second derivatives onto it gives the second fundamental form of
//! `ξ(M) ⊂ T₁M` without a chart of `T₁M`.

use nalgebra::{DMatrix, DVector};

use crate::bundle::BundlePoint;
use crate::error::{Error, Result};
use crate::field::{FieldGeometry, UnitField};
use crate::geometry::{field_frames, submanifold_frames, FieldFrames, OmegaTensor, SingularFrameSet};
use crate::jet::fd_step2;
use crate::manifold::{ChartMetric, ChartPoint, Christoffel, PointGeometry};

/// Relative step for the Sasaki Christoffel stencils.
pub const SASAKI_STEP: f64 = 1e-5;

/// `TM` over a chart, with the Sasaki metric in coordinates `(x, u)`.
#[derive(Debug, Clone)]
pub struct SasakiChart {
    pub base: ChartMetric,
}

impl SasakiChart {
    pub fn new(base: ChartMetric) -> Self {
        Self { base }
    }

    pub fn dim(&self) -> usize {
        2 * self.base.dim()
    }

    fn split(&self, c: &[f64]) -> BundlePoint {
        let d = self.base.dim();
        BundlePoint::new(&ChartPoint::new(&c[..d]), DVector::from_column_slice(&c[d..]))
    }
}

fn stack(p: &BundlePoint) -> Vec<f64> {
    p.x.as_slice().iter().chain(p.u.iter()).copied().collect()
}

/// `G = [[g + Mᵀ g M, Mᵀ g], [g M, g]]` with `M·X = Γ(X, u)`.
pub fn sasaki_metric_at(sc: &SasakiChart, p: &BundlePoint) -> Result<DMatrix<f64>> {
    let d = sc.base.dim();
    if p.u.len() != d || p.x.dim() != d {
        return Err(Error::Dimension { expected: d, got: p.u.len() });
    }
    let geo = PointGeometry::connection(&sc.base, &p.x)?;
    let m = geo.gamma.with_fiber(&p.u);
    let gm = &geo.g * &m;
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    out.view_mut((0, 0), (d, d)).copy_from(&(&geo.g + m.transpose() * &gm));
    out.view_mut((0, d), (d, d)).copy_from(&gm.transpose());
    out.view_mut((d, 0), (d, d)).copy_from(&gm);
    out.view_mut((d, d), (d, d)).copy_from(&geo.g);
    Ok(out)
}

fn sasaki_metric_derivatives(sc: &SasakiChart, p: &BundlePoint) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    let c = stack(p);
    let g0 = sasaki_metric_at(sc, p)?;
    let mut dg = Vec::with_capacity(c.len());
    for a in 0..c.len() {
        let h = SASAKI_STEP * c[a].abs().max(1.0);
        let mut q = c.clone();
        q[a] = c[a] + h;
        let gp = sasaki_metric_at(sc, &sc.split(&q))?;
        q[a] = c[a] - h;
        let gm = sasaki_metric_at(sc, &sc.split(&q))?;
        dg.push((gp - gm) / (2.0 * h));
    }
    Ok((g0, dg))
}

fn christoffel_from(g: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Result<Christoffel> {
    let n = g.nrows();
    let gi = g.clone().try_inverse().ok_or(Error::DegenerateMetric { index: n, value: g.determinant() })?;
    let mut data = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|l| 0.5 * gi[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)])).sum();
                data[(k * n + i) * n + j] = v;
                data[(k * n + j) * n + i] = v;
            }
        }
    }
    Ok(Christoffel { dim: n, data })
}

/// Christoffel symbols of the Sasaki metric by central differences of `G`.
pub fn sasaki_christoffel(sc: &SasakiChart, p: &BundlePoint) -> Result<Christoffel> {
    let (g, dg) = sasaki_metric_derivatives(sc, p)?;
    christoffel_from(&g, &dg)
}

/// `max |∂_c G_ab − G(∇_c ∂_a, ∂_b) − G(∂_a, ∇_c ∂_b)|` for the numerical
/// connection, with `∂G` from an independent (doubled-step) stencil.
pub fn sasaki_compatibility_residual(sc: &SasakiChart, p: &BundlePoint) -> Result<f64> {
    let gamma = sasaki_christoffel(sc, p)?;
    let c = stack(p);
    let g = sasaki_metric_at(sc, p)?;
    let n = c.len();
    let mut worst: f64 = 0.0;
    for cc in 0..n {
        let h = 2.0 * SASAKI_STEP * c[cc].abs().max(1.0);
        let mut q = c.clone();
        q[cc] = c[cc] + h;
        let gp = sasaki_metric_at(sc, &sc.split(&q))?;
        q[cc] = c[cc] - h;
        let gm = sasaki_metric_at(sc, &sc.split(&q))?;
        let dg = (gp - gm) / (2.0 * h);
        for a in 0..n {
            for b in 0..n {
                let mut r = dg[(a, b)];
                for d in 0..n {
                    r -= gamma.get(d, cc, a) * g[(d, b)] + gamma.get(d, cc, b) * g[(a, d)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

/// First and second derivatives of the field components by central
/// differences of values only.
fn field_derivatives(xi: &UnitField, x: &ChartPoint) -> Result<(DVector<f64>, DMatrix<f64>, Vec<DMatrix<f64>>)> {
    let d = x.dim();
    let c = x.as_slice().to_vec();
    let at = |q: &[f64]| xi.value(&ChartPoint::new(q));
    let v0 = at(&c)?;
    let hs: Vec<f64> = c.iter().map(|&ci| fd_step2(ci)).collect();
    let mut d1 = DMatrix::zeros(d, d);
    // d2[k][(a, b)] = ∂_a ∂_b ξ^k
    let mut d2 = vec![DMatrix::zeros(d, d); d];
    for a in 0..d {
        let mut q = c.clone();
        q[a] = c[a] + hs[a];
        let fp = at(&q)?;
        q[a] = c[a] - hs[a];
        let fm = at(&q)?;
        // first derivatives from a smaller, more accurate step
        let h1 = crate::jet::fd_step1(c[a]);
        q[a] = c[a] + h1;
        let gp = at(&q)?;
        q[a] = c[a] - h1;
        let gm = at(&q)?;
        for k in 0..d {
            d1[(k, a)] = (gp[k] - gm[k]) / (2.0 * h1);
            d2[k][(a, a)] = (fp[k] - 2.0 * v0[k] + fm[k]) / (hs[a] * hs[a]);
        }
        for b in (a + 1)..d {
            let corner = |sa: f64, sb: f64| {
                let mut q = c.clone();
                q[a] += sa * hs[a];
                q[b] += sb * hs[b];
                at(&q)
            };
            let (pp, pm, mp, mm) = (corner(1.0, 1.0)?, corner(1.0, -1.0)?, corner(-1.0, 1.0)?, corner(-1.0, -1.0)?);
            for k in 0..d {
                let v = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * hs[a] * hs[b]);
                d2[k][(a, b)] = v;
                d2[k][(b, a)] = v;
            }
        }
    }
    Ok((v0, d1, d2))
}

/// Oracle value of `Ω̃` together with diagnostics.
#[derive(Debug, Clone)]
pub struct BruteForce {
    pub omega: OmegaTensor,
    /// `max_σ |G(ñ_σ, u^v)|` with `u = ξ(x)`: the normals are tangent to `T₁M`.
    pub normal_radial: f64,
    /// `max |G(ñ_σ, T_a)|`: the normals are normal to the immersion.
    pub normal_tangent: f64,
}

/// Second fundamental form of `x ↦ (x, ξ(x))` in the frames `frames`.
pub fn brute_force_with(m: &ChartMetric, xi: &UnitField, fg: &FieldGeometry, frames: &FieldFrames) -> Result<BruteForce> {
    let x = &fg.geo.x;
    let d = x.dim();
    let sc = SasakiChart::new(m.clone());
    let (u, dxi, d2xi) = field_derivatives(xi, x)?;
    let p = BundlePoint::new(x, u.clone());
    let g_big = sasaki_metric_at(&sc, &p)?;
    let gamma = sasaki_christoffel(&sc, &p)?;

    // T_a = (∂_a, ∂_a ξ) in stacked coordinates
    let t: Vec<DVector<f64>> = (0..d)
        .map(|a| DVector::from_fn(2 * d, |i, _| if i < d { f64::from(u8::from(i == a)) } else { dxi[(i - d, a)] }))
        .collect();
    let sub = submanifold_frames(fg, frames);
    let normals: Vec<DVector<f64>> = sub.normal.iter().map(|n| n.stacked()).collect();
    let inner = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &g_big * b)[0];

    // ⟨∇̃_{T_a} T_b, ñ_σ⟩
    let mut proj = vec![DMatrix::zeros(d, d); normals.len()];
    for a in 0..d {
        for b in a..d {
            let mut acc = gamma.contract(&t[a], &t[b]);
            for k in 0..d {
                acc[d + k] += d2xi[k][(a, b)];
            }
            for (s, n) in normals.iter().enumerate() {
                let v = inner(&acc, n);
                proj[s][(a, b)] = v;
                proj[s][(b, a)] = v;
            }
        }
    }

    let lam = &frames.local.lambda;
    let c = DMatrix::from_fn(d, d, |row, i| frames.e[(row, i)] / (1.0 + lam[i] * lam[i]).sqrt());
    let values = proj.iter().map(|pm| c.transpose() * pm * &c).collect();

    let radial = DVector::from_fn(2 * d, |i, _| if i < d { 0.0 } else { u[i - d] });
    let normal_radial = normals.iter().map(|n| inner(n, &radial).abs()).fold(0.0, f64::max);
    let normal_tangent =
        normals.iter().flat_map(|n| t.iter().map(move |ta| (n, ta))).map(|(n, ta)| inner(n, ta).abs()).fold(0.0, f64::max);

    Ok(BruteForce {
        omega: OmegaTensor {
            values,
            frame: SingularFrameSet { e: frames.e.clone(), f: frames.f.clone(), lambda: lam.clone(), signed: frames.local.signed },
            lambdas: lam.clone(),
        },
        normal_radial,
        normal_tangent,
    })
}

/// Oracle `Ω̃` at `x`, in the same frames [`crate::geometry::omega_general`] uses.
pub fn brute_second_fundamental_form(m: &ChartMetric, xi: &UnitField, x: &ChartPoint) -> Result<OmegaTensor> {
    Ok(brute_force(m, xi, x)?.omega)
}

pub fn brute_force(m: &ChartMetric, xi: &UnitField, x: &ChartPoint) -> Result<BruteForce> {
    let fg = FieldGeometry::at(m, xi, x)?;
    let frames = field_frames(&fg, None)?;
    brute_force_with(m, xi, &fg, &frames)
}
