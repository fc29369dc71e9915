//! Surfaces (and their higher-dimensional analogues) on which the unit normal
//! of the `t = const` foliation spans a totally geodesic submanifold of the
//! unit tangent bundle:
//!
//! `ds² = (t²−1)²/(t⁴(t²+1)²) dt² + a² t²/(t²+1)² Σ (dv^α)²`,
//!
//! where `t` is the geodesic curvature of the leaves. For `a = 1`, `n = 1`
//! the surface is realised by revolving the profile
//! `x = t/(t²+1)`, `z = (2t²+1)^{3/2}/(t(t²+1))`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::dsl;
use crate::error::{Error, Result};
use crate::field::UnitField;
use crate::manifold::{ChartMetric, ChartPoint, DomainGuard, PointGeometry};
use crate::ode::branch_of;

/// Guard half-widths around the excluded values `t = 0`, `t = ±1`, and the cutoff for large `|t|`.
pub const GUARD_ZERO: f64 = 0.05;
pub const GUARD_POLE: f64 = 0.05;
pub const GUARD_FAR: f64 = 50.0;

pub const G_TT: &str = "(t^2-1)^2/(t^4*(t^2+1)^2)";
pub const X_PROFILE: &str = "t/(t^2+1)";
pub const Z_PROFILE: &str = "(2*t^2+1)^(3/2)/(t*(t^2+1))";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifiedSurface {
    pub a: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl ClassifiedSurface {
    /// Checks `a > 0`, `n ≥ 1` and that `[t_min, t_max]` minus its endpoints
    /// lies in one of the four open branches.
    pub fn new(a: f64, t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Branch(format!("scale a = {a} must be positive")));
        }
        if n == 0 {
            return Err(Error::Branch("leaf dimension must be at least 1".into()));
        }
        if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(Error::Branch(format!("empty or invalid t-range [{t_min}, {t_max}]")));
        }
        let mid = 0.5 * (t_min + t_max);
        let b = branch_of(mid);
        let inside = |t: f64| t == t_min || t == t_max || branch_of(t) == b;
        let crosses = [-1.0, 0.0, 1.0].iter().any(|&s| s > t_min && s < t_max);
        if b.is_none() || crosses || !inside(t_min) || !inside(t_max) {
            return Err(Error::Branch(format!("t-range [{t_min}, {t_max}] touches or crosses t ∈ {{0, ±1}}")));
        }
        Ok(Self { a, t_min, t_max, n })
    }

    /// Profile and mesh are only available for the regular case.
    fn require_profile(&self) -> Result<()> {
        if self.a != 1.0 {
            return Err(Error::Branch(format!("profile curve is only defined for a = 1 (got {})", self.a)));
        }
        Ok(())
    }

    fn contains_closure(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }
}

fn guard() -> DomainGuard {
    DomainGuard::new("|t| >= 0.05, |t^2 - 1| >= 0.05, |t| <= 50", |x: &[f64]| {
        let t = x[0];
        if t.abs() < GUARD_ZERO {
            Some(format!("t = {t} too close to 0"))
        } else if (t * t - 1.0).abs() < GUARD_POLE {
            Some(format!("t = {t} too close to ±1"))
        } else if t.abs() > GUARD_FAR {
            Some(format!("|t| = {} beyond {GUARD_FAR}", t.abs()))
        } else {
            None
        }
    })
}

fn leaf_coords(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["v".into()]
    } else {
        (1..=n).map(|i| format!("v{i}")).collect()
    }
}

/// The metric with analytic derivatives, coordinates `(t, v)` or `(t, v1, …, vn)`.
pub fn classified_metric(s: &ClassifiedSurface) -> Result<ChartMetric> {
    let mut coords = vec!["t".to_string()];
    coords.extend(leaf_coords(s.n));
    let g_vv = format!("{}*t^2/(t^2+1)^2", s.a * s.a);
    let mut diag = vec![G_TT];
    diag.extend(std::iter::repeat_n(g_vv.as_str(), s.n));
    Ok(ChartMetric::diagonal(&coords, &diag)?.with_guard(guard()))
}

/// Unit normal to the leaves `t = const`, oriented so the leaf curvature is `+t`.
pub fn classified_field(metric: &ChartMetric) -> Result<UnitField> {
    let mut comps = vec!["t^2*(t^2+1)/(t^2-1)".to_string()];
    comps.extend((1..metric.dim()).map(|_| "0".to_string()));
    UnitField::symbolic(metric, &comps)
}

/// `K = 2t²/(t²−1)`.
pub fn gaussian_curvature(t: f64) -> f64 {
    2.0 * t * t / (t * t - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    /// Gaussian curvature; NaN at the singular point.
    #[serde(rename = "K")]
    pub k_gauss: f64,
    pub singular: bool,
}

pub fn profile_x(t: f64) -> f64 {
    t / (t * t + 1.0)
}

pub fn profile_z(t: f64) -> f64 {
    (2.0 * t * t + 1.0).powf(1.5) / (t * (t * t + 1.0))
}

/// `(x'(t), z'(t))` in closed form.
pub fn profile_derivatives(t: f64) -> (f64, f64) {
    let t2 = t * t;
    let q = t2 + 1.0;
    ((1.0 - t2) / (q * q), (t2 - 1.0) * (2.0 * t2 + 1.0).sqrt() / (t2 * q * q))
}

/// Point of the profile at `t`, which must lie in the closure of the surface's range.
pub fn profile_curve(s: &ClassifiedSurface, t: f64) -> Result<ProfilePoint> {
    s.require_profile()?;
    if t == 0.0 || !t.is_finite() || !s.contains_closure(t) {
        return Err(Error::Branch(format!("t = {t} is outside [{}, {}]", s.t_min, s.t_max)));
    }
    let singular = (t * t - 1.0).abs() < 1e-12;
    Ok(ProfilePoint {
        t,
        x: profile_x(t),
        z: profile_z(t),
        k_gauss: if singular { f64::NAN } else { gaussian_curvature(t) },
        singular,
    })
}

/// `(x')² + (z')² − g_tt` with the derivatives taken symbolically from the
/// profile expressions.
pub fn isometry_residual(t: f64) -> Result<f64> {
    let coords = ["t"];
    let x = dsl::parse(X_PROFILE, &coords)?.differentiate("t")?;
    let z = dsl::parse(Z_PROFILE, &coords)?.differentiate("t")?;
    let g = dsl::parse(G_TT, &coords)?;
    let (xp, zp) = (x.eval(&[t])?, z.eval(&[t])?);
    Ok(xp * xp + zp * zp - g.eval(&[t])?)
}

/// `samples` evenly spaced profile points over the full range.
pub fn profile_samples(s: &ClassifiedSurface, samples: usize) -> Result<Vec<ProfilePoint>> {
    if samples < 2 {
        return Err(Error::Sampling(format!("need at least 2 samples, got {samples}")));
    }
    let step = (s.t_max - s.t_min) / (samples - 1) as f64;
    (0..samples)
        .map(|i| {
            let t = if i == samples - 1 { s.t_max } else { s.t_min + step * i as f64 };
            profile_curve(s, t)
        })
        .collect()
}

/// CSV with header `t,x,z,K,singular_flag`.
pub fn profile_csv(points: &[ProfilePoint]) -> String {
    let mut out = String::from("t,x,z,K,singular_flag\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{},{}", p.t, p.x, p.z, p.k_gauss, u8::from(p.singular));
    }
    out
}

/// Triangulated surface of revolution with per-vertex Gaussian curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices.
    pub faces: Vec<[usize; 3]>,
    /// Per-vertex `(t, v, K)`.
    pub attributes: Vec<(f64, f64, f64)>,
}

/// Grid of `t_samples × v_samples` vertices, `t`-major, closed in `v`.
pub fn mesh_export(s: &ClassifiedSurface, t_samples: usize, v_samples: usize) -> Result<Mesh> {
    s.require_profile()?;
    if s.n != 1 {
        return Err(Error::Branch(format!("meshes are only produced for n = 1 (got {})", s.n)));
    }
    if t_samples < 2 || v_samples < 3 {
        return Err(Error::Sampling(format!("need t_samples >= 2 and v_samples >= 3, got {t_samples} x {v_samples}")));
    }
    let profile = profile_samples(s, t_samples)?;
    if profile.iter().any(|p| p.singular) {
        return Err(Error::Branch("mesh range includes the singular point t = ±1".into()));
    }
    let rows: Vec<Vec<([f64; 3], (f64, f64, f64))>> = profile
        .par_iter()
        .map(|p| {
            (0..v_samples)
                .map(|j| {
                    let v = 2.0 * PI * j as f64 / v_samples as f64;
                    ([p.x * v.cos(), p.x * v.sin(), p.z], (p.t, v, p.k_gauss))
                })
                .collect()
        })
        .collect();
    let (vertices, attributes) = rows.into_iter().flatten().unzip();
    let mut faces = Vec::with_capacity(2 * (t_samples - 1) * v_samples);
    for i in 0..t_samples - 1 {
        for j in 0..v_samples {
            let a = i * v_samples + j;
            let b = i * v_samples + (j + 1) % v_samples;
            let c = a + v_samples;
            let d = b + v_samples;
            faces.push([a, b, d]);
            faces.push([a, d, c]);
        }
    }
    Ok(Mesh { vertices, faces, attributes })
}

impl Mesh {
    /// ASCII OBJ, one-based face indices.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }

    /// CSV `index,t,v,K` keyed by one-based OBJ vertex index.
    pub fn curvature_csv(&self) -> String {
        let mut out = String::from("index,t,v,K\n");
        for (i, (t, v, k)) in self.attributes.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", i + 1, t, v, k);
        }
        out
    }
}

/// `k = −g_u/g` for a metric `du² + g(u)² dv²` in coordinates `(u, v)`.
pub fn geodesic_curvature_of_parallels(m: &ChartMetric, x: &ChartPoint) -> Result<f64> {
    if m.dim() != 2 {
        return Err(Error::Form(format!("expected a 2-dimensional chart, got {}", m.dim())));
    }
    let geo = PointGeometry::connection(m, x)?;
    let g = &geo.g;
    if (g[(0, 0)] - 1.0).abs() > 1e-12 || geo.dg.iter().any(|d| d[(0, 0)].abs() > 1e-8) {
        return Err(Error::Form(format!("g_uu = {} is not identically 1", g[(0, 0)])));
    }
    if g[(0, 1)].abs() > 1e-12 {
        return Err(Error::Form(format!("cross term g_uv = {} is not zero", g[(0, 1)])));
    }
    // g = sqrt(g_vv): g_u/g = ∂_u g_vv / (2 g_vv)
    Ok(-geo.dg[0][(1, 1)] / (2.0 * g[(1, 1)]))
}

/// Arc length along `t` with `u(t) = 2 atan t + 1/t` (so `du/dt` carries the sign of `t² − 1`).
pub fn arc_length(t: f64) -> f64 {
    2.0 * t.atan() + 1.0 / t
}

/// Inverse of [`arc_length`] on the branch of `(t_min, t_max)` by bisection.
pub fn arc_length_inverse(u: f64, t_min: f64, t_max: f64) -> Option<f64> {
    let (mut lo, mut hi) = (t_min, t_max);
    let (flo, fhi) = (arc_length(lo) - u, arc_length(hi) - u);
    if flo * fhi > 0.0 {
        return None;
    }
    let increasing = fhi > flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (arc_length(mid) - u > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs() {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// The `n = 1` metric rewritten as `du² + (a t(u)/(t(u)²+1))² dv²`, with
/// `t(u)` found numerically (derivatives by finite differences).
pub fn arc_length_metric(s: &ClassifiedSurface) -> Result<ChartMetric> {
    let (lo, hi, a) = (s.t_min, s.t_max, s.a);
    ChartMetric::numeric(&["u", "v"], move |x: &[f64]| {
        let t = arc_length_inverse(x[0], lo, hi).ok_or_else(|| format!("u = {} is outside the branch", x[0]))?;
        let f = a * t / (t * t + 1.0);
        Ok(nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, f * f]))
    })
}
