//! Unit vector fields on a chart and their first and second covariant
//! derivatives.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dsl;
use crate::error::{Error, Result};
use crate::jet::{DerivativeMode, Source, SymbolicFamily};
use crate::manifold::{ChartMetric, ChartPoint, PointGeometry, TangentVector};

/// Unit-length tolerance for field values.
pub const UNIT_TOL: f64 = 1e-9;

/// A vector field given by its coordinate components.
#[derive(Debug, Clone)]
pub struct UnitField {
    coords: Vec<String>,
    source: Source,
}

impl UnitField {
    /// Components as expressions in the metric's coordinates.
    pub fn symbolic<S: AsRef<str>>(metric: &ChartMetric, components: &[S]) -> Result<Self> {
        let coords = metric.coords();
        if components.len() != coords.len() {
            return Err(Error::Dimension { expected: coords.len(), got: components.len() });
        }
        let exprs = components.iter().map(|c| dsl::parse(c.as_ref(), coords)).collect::<Result<Vec<_>, _>>()?;
        let family = SymbolicFamily::from_exprs(coords, exprs)?;
        Ok(Self { coords: coords.to_vec(), source: Source::Symbolic(Arc::new(family)) })
    }

    /// Components given numerically; derivatives by central differences.
    pub fn numeric(
        metric: &ChartMetric,
        f: impl Fn(&[f64]) -> std::result::Result<Vec<f64>, String> + Send + Sync + 'static,
    ) -> Self {
        Self {
            coords: metric.coords().to_vec(),
            source: Source::Numeric { outputs: metric.dim(), f: Arc::new(f) },
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.source.mode()
    }

    /// Coordinate components `ξ^k(x)`.
    pub fn value(&self, x: &ChartPoint) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.source.values(x.as_slice())?))
    }

    pub(crate) fn jet(&self, x: &ChartPoint, order: u8) -> Result<crate::jet::Jet> {
        self.source.jet(x.as_slice(), order)
    }
}

/// Everything about `ξ` at one point that the second-fundamental-form
/// formulas need.
#[derive(Debug, Clone)]
pub struct FieldGeometry {
    pub geo: PointGeometry,
    pub xi: DVector<f64>,
    /// `dxi[(k, a)] = ∂_a ξ^k`
    pub dxi: DMatrix<f64>,
    /// `cov[(k, b)] = (∇_{∂_b} ξ)^k`
    pub cov: DMatrix<f64>,
    /// `dcov[m][(k, b)] = ∂_m (∇_{∂_b} ξ)^k`
    pub dcov: Vec<DMatrix<f64>>,
    /// `hess[k][(a, b)] = (∇²ξ)(∂_a, ∂_b)^k = r(∂_a, ∂_b)ξ`
    pub hess: Vec<DMatrix<f64>>,
}

impl FieldGeometry {
    pub fn at(m: &ChartMetric, field: &UnitField, x: &ChartPoint) -> Result<Self> {
        if field.dim() != m.dim() {
            return Err(Error::Dimension { expected: m.dim(), got: field.dim() });
        }
        let geo = PointGeometry::full(m, x)?;
        let jet = field.jet(x, 2)?;
        let d = geo.dim;
        let xi = DVector::from_column_slice(&jet.value);
        let norm = geo.norm(&xi);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(norm));
        }
        let dxi = DMatrix::from_fn(d, d, |k, a| jet.d1(k, a));
        let gm = &geo.gamma;
        let cov = DMatrix::from_fn(d, d, |k, b| dxi[(k, b)] + (0..d).map(|c| gm.get(k, b, c) * xi[c]).sum::<f64>());
        let dcov: Vec<DMatrix<f64>> = (0..d)
            .map(|mm| {
                let dg = &geo.dgamma[mm];
                DMatrix::from_fn(d, d, |k, b| {
                    let mut v = jet.d2(k, mm, b);
                    for c in 0..d {
                        v += dg.get(k, b, c) * xi[c] + gm.get(k, b, c) * dxi[(c, mm)];
                    }
                    v
                })
            })
            .collect();
        let hess: Vec<DMatrix<f64>> = (0..d)
            .map(|k| {
                DMatrix::from_fn(d, d, |a, b| {
                    let mut v = dcov[a][(k, b)];
                    for c in 0..d {
                        v += gm.get(k, a, c) * cov[(c, b)] - gm.get(c, a, b) * cov[(k, c)];
                    }
                    v
                })
            })
            .collect();
        Ok(Self { geo, xi, dxi, cov, dcov, hess })
    }

    pub fn dim(&self) -> usize {
        self.geo.dim
    }

    /// `∇_X ξ`.
    pub fn nabla(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.cov * x
    }

    /// `A_ξ X = −∇_X ξ`.
    pub fn shape(&self, x: &DVector<f64>) -> DVector<f64> {
        -(&self.cov * x)
    }

    /// `r(X,Y)ξ = ∇_X∇_Y ξ − ∇_{∇_X Y} ξ`.
    pub fn half(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        DVector::from_fn(d, |k, _| (x.transpose() * &self.hess[k] * y)[0])
    }

    /// `|∇_ξ ξ|`.
    pub fn geodesic_defect(&self) -> f64 {
        self.geo.norm(&self.nabla(&self.xi))
    }
}

/// `r(X,Y)ξ` at the common base point of `X` and `Y`.
pub fn half_tensor(m: &ChartMetric, field: &UnitField, x: &TangentVector, y: &TangentVector) -> Result<TangentVector> {
    if x.base != y.base {
        return Err(Error::Domain {
            point: y.base.as_slice().to_vec(),
            reason: "tangent vectors are attached to different points".into(),
        });
    }
    let fg = FieldGeometry::at(m, field, &x.base)?;
    Ok(TangentVector::from_vector(&x.base, fg.half(&x.comp, &y.comp)))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn sphere() -> ChartMetric {
        ChartMetric::diagonal(&["u", "v"], &["1", "sin(u)^2"]).unwrap()
    }

    fn v(c: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(c)
    }

    #[test]
    fn parallel_field_has_zero_half_tensor() {
        let m = ChartMetric::diagonal(&["x", "y"], &["1", "1"]).unwrap();
        let f = UnitField::symbolic(&m, &["0.6", "0.8"]).unwrap();
        let x = ChartPoint::new(&[0.3, 0.4]);
        let r = half_tensor(&m, &f, &TangentVector::new(&x, &[1.0, 2.0]), &TangentVector::new(&x, &[-1.0, 0.5])).unwrap();
        assert_eq!(r.comp.amax(), 0.0);
    }

    #[test]
    fn sphere_radial_field_half_tensor() {
        let m = sphere();
        let f = UnitField::symbolic(&m, &["1", "0"]).unwrap();
        let u = PI / 4.0;
        let fg = FieldGeometry::at(&m, &f, &ChartPoint::new(&[u, 0.0])).unwrap();
        let e1 = v(&[0.0, 1.0 / u.sin()]);
        let k = -u.cos() / u.sin();
        assert!(fg.geo.inner(&fg.half(&e1, &e1), &e1).abs() < 1e-14);
        let r = fg.geo.inner(&fg.half(&e1, &fg.xi), &e1);
        assert!((r + k * k).abs() < 1e-12, "{r}");
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_unit_field_is_rejected() {
        let m = sphere();
        let f = UnitField::symbolic(&m, &["1", "1"]).unwrap();
        assert!(matches!(FieldGeometry::at(&m, &f, &ChartPoint::new(&[1.0, 0.0])), Err(Error::NotUnit(_))));
    }

    // A rotating unit field on a family of warped metrics du² + f(u)² dv².
    fn warped_cases() -> Vec<(ChartMetric, UnitField)> {
        let profiles = ["1+u^2", "2+sin(u)", "exp(u/3)", "cos(u/4)+u"];
        profiles
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let m = ChartMetric::diagonal(&["u", "v"], &["1", &format!("({f})^2")]).unwrap();
                let theta = format!("({}*u+0.3*v)", 0.2 + 0.1 * i as f64);
                let field = UnitField::symbolic(&m, &[format!("cos{theta}"), format!("sin{theta}/({f})")]).unwrap();
                (m, field)
            })
            .collect()
    }

    #[test]
    fn antisymmetrized_half_tensor_is_curvature() {
        for (m, field) in warped_cases() {
            for (u, w) in [(0.4, 0.1), (1.3, -0.7), (2.2, 2.0)] {
                let fg = FieldGeometry::at(&m, &field, &ChartPoint::new(&[u, w])).unwrap();
                let x = v(&[0.3, -1.1]);
                let y = v(&[1.7, 0.4]);
                let lhs = fg.half(&x, &y) - fg.half(&y, &x);
                let rhs = fg.geo.riemann().apply(&x, &y, &fg.xi);
                assert!((lhs - rhs).amax() < 1e-6);
            }
        }
    }

    #[test]
    fn half_tensor_is_tensorial() {
        for (m, field) in warped_cases() {
            let fg = FieldGeometry::at(&m, &field, &ChartPoint::new(&[0.9, 0.2])).unwrap();
            let (x, x2, y) = (v(&[0.3, -1.1]), v(&[2.0, 0.25]), v(&[1.7, 0.4]));
            let a = -2.5;
            assert!((fg.half(&(&x * a), &y) - fg.half(&x, &y) * a).amax() < 1e-9);
            assert!((fg.half(&(&x + &x2), &y) - fg.half(&x, &y) - fg.half(&x2, &y)).amax() < 1e-9);
            assert!((fg.half(&y, &(&x + &x2)) - fg.half(&y, &x) - fg.half(&y, &x2)).amax() < 1e-9);
        }
    }

    #[test]
    fn image_of_shape_operator_is_orthogonal_to_xi() {
        for (m, field) in warped_cases() {
            let fg = FieldGeometry::at(&m, &field, &ChartPoint::new(&[1.1, -0.3])).unwrap();
            for x in [v(&[1.0, 0.0]), v(&[0.0, 1.0])] {
                assert!(fg.geo.inner(&fg.shape(&x), &fg.xi).abs() < 1e-12);
            }
        }
    }
}
