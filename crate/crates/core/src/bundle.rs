//! The tangent bundle in induced coordinates `(x, u)` with the Sasaki metric.
//!
//! A tangent vector to `TM` is stored as its coordinate increments
//! `(dx, du)`. Its horizontal part is `π_*(dx, du) = dx` and its vertical part
//! is the connection map `K(dx, du) = du + Γ(dx, u)`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::field::{FieldGeometry, UnitField};
use crate::manifold::{ChartMetric, ChartPoint, PointGeometry, TangentVector};

#[derive(Debug, Clone, PartialEq)]
pub struct BundlePoint {
    pub x: ChartPoint,
    pub u: DVector<f64>,
}

impl BundlePoint {
    pub fn new(x: &ChartPoint, u: DVector<f64>) -> Self {
        Self { x: x.clone(), u }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleTangent {
    pub base: BundlePoint,
    pub dx: DVector<f64>,
    pub du: DVector<f64>,
}

impl BundleTangent {
    /// Rebuilds a tangent from its horizontal (`π_*`) and vertical (`K`) parts.
    pub fn from_parts(geo: &PointGeometry, base: &BundlePoint, horizontal: &DVector<f64>, vertical: &DVector<f64>) -> Self {
        let du = vertical - geo.gamma.contract(horizontal, &base.u);
        Self { base: base.clone(), dx: horizontal.clone(), du }
    }

    /// Stacked `(dx, du)` coordinates.
    pub fn stacked(&self) -> DVector<f64> {
        let d = self.dx.len();
        DVector::from_fn(2 * d, |i, _| if i < d { self.dx[i] } else { self.du[i - d] })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { base: self.base.clone(), dx: &self.dx * s, du: &self.du * s }
    }

    /// Sum of two tangents at the same base.
    pub fn add(&self, other: &BundleTangent) -> Result<Self> {
        if self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        Ok(Self { base: self.base.clone(), dx: &self.dx + &other.dx, du: &self.du + &other.du })
    }
}

/// `π_* t`.
pub fn project_pushforward(t: &BundleTangent) -> TangentVector {
    TangentVector::from_vector(&t.base.x, t.dx.clone())
}

pub(crate) fn connection_map_at(geo: &PointGeometry, t: &BundleTangent) -> DVector<f64> {
    &t.du + geo.gamma.contract(&t.dx, &t.base.u)
}

pub(crate) fn horizontal_lift_at(geo: &PointGeometry, p: &BundlePoint, x: &DVector<f64>) -> BundleTangent {
    BundleTangent { base: p.clone(), dx: x.clone(), du: -geo.gamma.contract(x, &p.u) }
}

pub(crate) fn vertical_lift_at(p: &BundlePoint, x: &DVector<f64>) -> BundleTangent {
    BundleTangent { base: p.clone(), dx: DVector::zeros(x.len()), du: x.clone() }
}

pub(crate) fn sasaki_inner_at(geo: &PointGeometry, t1: &BundleTangent, t2: &BundleTangent) -> Result<f64> {
    if t1.base != t2.base {
        return Err(Error::BaseMismatch);
    }
    let k1 = connection_map_at(geo, t1);
    let k2 = connection_map_at(geo, t2);
    Ok(geo.inner(&t1.dx, &t2.dx) + geo.inner(&k1, &k2))
}

/// Connection map `K t = du + Γ(dx, u)`.
pub fn connection_map(m: &ChartMetric, t: &BundleTangent) -> Result<TangentVector> {
    let geo = PointGeometry::connection(m, &t.base.x)?;
    Ok(TangentVector::from_vector(&t.base.x, connection_map_at(&geo, t)))
}

pub fn horizontal_lift(m: &ChartMetric, p: &BundlePoint, x: &TangentVector) -> Result<BundleTangent> {
    let geo = PointGeometry::connection(m, &p.x)?;
    Ok(horizontal_lift_at(&geo, p, &x.comp))
}

pub fn vertical_lift(m: &ChartMetric, p: &BundlePoint, x: &TangentVector) -> Result<BundleTangent> {
    m.check_domain(&p.x)?;
    Ok(vertical_lift_at(p, &x.comp))
}

/// Sasaki inner product `⟨π_*t1, π_*t2⟩ + ⟨K t1, K t2⟩`.
pub fn sasaki_inner(m: &ChartMetric, t1: &BundleTangent, t2: &BundleTangent) -> Result<f64> {
    if t1.base != t2.base {
        return Err(Error::BaseMismatch);
    }
    let geo = PointGeometry::connection(m, &t1.base.x)?;
    sasaki_inner_at(&geo, t1, t2)
}

pub(crate) fn field_tangent_at(fg: &FieldGeometry, x: &DVector<f64>) -> BundleTangent {
    let p = BundlePoint::new(&fg.geo.x, fg.xi.clone());
    let h = horizontal_lift_at(&fg.geo, &p, x);
    let v = vertical_lift_at(&p, &fg.nabla(x));
    BundleTangent { base: p, dx: h.dx + v.dx, du: h.du + v.du }
}

/// Differential of `ξ: M → TM` applied to `X`: `X^h + (∇_X ξ)^v` at `(x, ξ(x))`.
pub fn field_tangent_map(m: &ChartMetric, xi: &UnitField, x: &ChartPoint, v: &TangentVector) -> Result<BundleTangent> {
    let fg = FieldGeometry::at(m, xi, x)?;
    Ok(field_tangent_at(&fg, &v.comp))
}
