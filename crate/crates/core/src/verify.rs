//! Invariant suites over the builtin scenarios, reported as TAP lines.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DVector;

use crate::bundle::{connection_map, horizontal_lift, project_pushforward, sasaki_inner, vertical_lift, BundlePoint};
use crate::classified::{gaussian_curvature, isometry_residual, profile_curve, profile_z, ClassifiedSurface};
use crate::error::{Error, Result};
use crate::field::FieldGeometry;
use crate::geometry::{
    curvature_adapted_residuals, field_frames, lemma3_identities_at, leaf_data_at, omega_foliation_at, omega_general_at,
    submanifold_frames, tg_condition_residual,
};
use crate::manifold::{jacobi_from_geometry, ChartPoint, TangentVector};
use crate::ode::{implicit_solution, integrate_k, OdeOptions, Stop};
use crate::oracle::brute_force_with;
use crate::sampling::sample_points;
use crate::scenario::{builtin, Scenario, BUILTIN, TOL_ANALYTIC};

/// Points per scenario in every suite.
pub const SUITE_POINTS: usize = 20;
/// Relative tolerance for algebraic identities of computed tensors.
pub const STRUCTURE_TOL: f64 = 1e-8;
pub const FRAME_TOL: f64 = 1e-9;
pub const LEMMA3_TOL: f64 = 1e-6;
pub const SPHERE_K_TOL: f64 = 1e-8;
pub const GAUSS_TOL: f64 = 1e-6;
pub const CONDITION_TOL: f64 = 1e-9;
pub const SPHERE_CONDITION_TOL: f64 = 1e-8;
pub const ODE_TOL: f64 = 1e-8;
pub const ISOMETRY_TOL: f64 = 1e-10;
pub const PROFILE_TOL: f64 = 1e-12;
pub const ASYMPTOTE_TOL: f64 = 1e-6;
/// Totally-geodesic bound for the higher-dimensional leaves.
pub const MULTI_TG_TOL: f64 = 1e-5;
/// Oracle normals must be normal to `ξ(M)` and tangent to `T₁M`.
pub const NORMAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Structure,
    Lemma3,
    Oracle,
    Curvature,
    Ode,
    Classified,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["all", "structure", "lemma3", "oracle", "curvature", "ode", "classified"];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "structure" => Suite::Structure,
            "lemma3" => Suite::Lemma3,
            "oracle" => Suite::Oracle,
            "curvature" => Suite::Curvature,
            "ode" => Suite::Ode,
            "classified" => Suite::Classified,
            other => return Err(Error::Scenario(format!("unknown suite '{other}' (one of {})", Suite::NAMES.join(", ")))),
        })
    }
}

/// One verified property: passes iff `residual < threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub description: String,
    pub residual: f64,
    pub threshold: f64,
    pub error: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.residual < self.threshold
    }

    fn from_result(description: impl Into<String>, threshold: f64, r: Result<f64>) -> Self {
        let description = description.into();
        match r {
            Ok(residual) => Self { description, residual, threshold, error: None },
            Err(e) => Self { description, residual: f64::NAN, threshold, error: Some(e.to_string()) },
        }
    }
}

/// TAP plan and one `ok/not ok` line per check.
pub fn to_tap(checks: &[Check]) -> String {
    let mut out = format!("TAP version 13\n1..{}\n", checks.len());
    for (i, c) in checks.iter().enumerate() {
        let status = if c.passed() { "ok" } else { "not ok" };
        let _ = write!(out, "{status} {} - {} (residual={:.3e}", i + 1, c.description, c.residual);
        if let Some(e) = &c.error {
            let _ = write!(out, "; error: {e}");
        }
        let _ = writeln!(out, ")");
    }
    out
}

/// Runs `suite`; `tol` overrides the classification tolerance of the
/// totally-geodesic/minimal checks.
pub fn run(suite: Suite, tol: Option<f64>) -> Vec<Check> {
    let tol = tol.unwrap_or(TOL_ANALYTIC);
    match suite {
        Suite::All => [Suite::Structure, Suite::Lemma3, Suite::Oracle, Suite::Curvature, Suite::Ode, Suite::Classified]
            .into_iter()
            .flat_map(|s| run(s, Some(tol)))
            .collect(),
        Suite::Structure => BUILTIN.iter().flat_map(|n| structure(n)).collect(),
        Suite::Lemma3 => ["sphere2", "classified", "classified-n2", "classified-n3", "flat3-parallel"]
            .iter()
            .map(|n| lemma3(n))
            .collect(),
        Suite::Oracle => BUILTIN.iter().flat_map(|n| oracle(n)).collect(),
        Suite::Curvature => curvature(),
        Suite::Ode => ode(),
        Suite::Classified => classified(tol),
    }
}

fn points(s: &Scenario) -> Result<Vec<ChartPoint>> {
    sample_points(&s.regions, SUITE_POINTS)
}

/// Max of `f` over the scenario's suite points.
fn sweep(s: &Scenario, mut f: impl FnMut(&Scenario, &ChartPoint, usize) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, x) in points(s)?.iter().enumerate() {
        let v = f(s, x, i)?;
        worst = if v.is_nan() { f64::NAN } else { worst.max(v) };
    }
    Ok(worst)
}

fn scenario_sweep(
    name: &str,
    description: &str,
    threshold: f64,
    f: impl FnMut(&Scenario, &ChartPoint, usize) -> Result<f64>,
) -> Check {
    let r = builtin(name).and_then(|s| sweep(&s, f));
    Check::from_result(format!("{name}: {description}"), threshold, r)
}

fn coord_vec(d: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(d, |k, _| f64::from(u8::from(k == i)))
}

fn structure(name: &str) -> Vec<Check> {
    vec![
        scenario_sweep(name, "curvature tensor symmetries", STRUCTURE_TOL, |s, x, _| {
            let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
            let r = fg.geo.riemann();
            let d = fg.dim();
            let mut scale: f64 = 1.0;
            for l in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        for k in 0..d {
                            scale = scale.max(r.down(l, i, j, k).abs());
                        }
                    }
                }
            }
            Ok(r.symmetry_residual() / scale)
        }),
        scenario_sweep(name, "metric compatibility", STRUCTURE_TOL, |s, x, _| {
            let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
            let scale = fg.geo.dg.iter().map(|m| m.amax()).fold(1.0, f64::max);
            Ok(fg.geo.compatibility_residual() / scale)
        }),
        scenario_sweep(name, "Sasaki lift identities", STRUCTURE_TOL, |s, x, _| {
            let u = s.field.value(x)?;
            let p = BundlePoint::new(x, u);
            let g = crate::manifold::metric_at(&s.metric, x)?;
            let d = x.dim();
            let scale = g.amax().max(1.0);
            let mut worst: f64 = 0.0;
            for i in 0..d {
                let xi = TangentVector::from_vector(x, coord_vec(d, i));
                let hi = horizontal_lift(&s.metric, &p, &xi)?;
                let vi = vertical_lift(&s.metric, &p, &xi)?;
                worst = worst.max(connection_map(&s.metric, &hi)?.comp.amax());
                worst = worst.max((connection_map(&s.metric, &vi)?.comp - &xi.comp).amax());
                worst = worst.max(project_pushforward(&vi).comp.amax());
                for j in 0..d {
                    let xj = TangentVector::from_vector(x, coord_vec(d, j));
                    let hj = horizontal_lift(&s.metric, &p, &xj)?;
                    let vj = vertical_lift(&s.metric, &p, &xj)?;
                    worst = worst.max((sasaki_inner(&s.metric, &hi, &hj)? - g[(i, j)]).abs() / scale);
                    worst = worst.max((sasaki_inner(&s.metric, &vi, &vj)? - g[(i, j)]).abs() / scale);
                    worst = worst.max(sasaki_inner(&s.metric, &hi, &vj)?.abs() / scale);
                }
            }
            Ok(worst)
        }),
        scenario_sweep(name, "singular frames orthonormal and related by the shape operator", FRAME_TOL, |s, x, _| {
            let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
            let frames = field_frames(&fg, None)?;
            let lam = frames.local.lambda.amax().max(1.0);
            Ok(frames.local.orthonormality_residual().max(frames.local.relation_residual(&frames.shape.matrix) / lam))
        }),
        scenario_sweep(name, "adapted frames of the image are Sasaki-orthonormal", FRAME_TOL, |s, x, _| {
            let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
            let frames = field_frames(&fg, None)?;
            let sub = submanifold_frames(&fg, &frames);
            let all: Vec<_> = sub.tangent.iter().chain(&sub.normal).collect();
            let mut worst: f64 = 0.0;
            for (a, ta) in all.iter().enumerate() {
                for (b, tb) in all.iter().enumerate() {
                    let want = f64::from(u8::from(a == b));
                    worst = worst.max((sasaki_inner(&s.metric, ta, tb)? - want).abs());
                }
            }
            Ok(worst)
        }),
        scenario_sweep(name, "second fundamental form symmetric in i, j", STRUCTURE_TOL, |s, x, _| {
            let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
            let frames = field_frames(&fg, None)?;
            let general = omega_general_at(&fg, &frames);
            let mut worst = general.symmetry_residual();
            if let Ok(leaf) = leaf_data_at(&s.metric, &s.field, &fg) {
                worst = worst.max(omega_foliation_at(&fg, &leaf).symmetry_residual());
            }
            Ok(worst)
        }),
    ]
}

fn lemma3(name: &str) -> Check {
    scenario_sweep(name, "leaf identities for the half tensor", LEMMA3_TOL, |s, x, _| {
        let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
        let leaf = leaf_data_at(&s.metric, &s.field, &fg)?;
        Ok(lemma3_identities_at(&fg, &leaf).max())
    })
}

fn oracle(name: &str) -> Vec<Check> {
    let tol = builtin(name).map(|s| s.oracle_tol).unwrap_or(0.0);
    vec![
        scenario_sweep(name, "general formula agrees with the brute-force oracle", tol, |s, x, _| {
            let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
            let frames = field_frames(&fg, None)?;
            let bf = brute_force_with(&s.metric, &s.field, &fg, &frames)?;
            Ok(omega_general_at(&fg, &frames).max_difference(&bf.omega))
        }),
        scenario_sweep(name, "oracle normals are normal to the image and tangent to the unit bundle", NORMAL_TOL, |s, x, _| {
            let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
            let frames = field_frames(&fg, None)?;
            let bf = brute_force_with(&s.metric, &s.field, &fg, &frames)?;
            Ok(bf.normal_radial.max(bf.normal_tangent))
        }),
    ]
}

fn curvature() -> Vec<Check> {
    let mut out = vec![scenario_sweep("sphere2", "K=1 for every coordinate plane", SPHERE_K_TOL, |s, x, _| {
        let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
        Ok((fg.geo.sectional(&coord_vec(2, 0), &coord_vec(2, 1))? - 1.0).abs())
    })];
    out.push(scenario_sweep("classified", "Gaussian curvature equals 2t^2/(t^2-1)", GAUSS_TOL, |s, x, _| {
        let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
        Ok((fg.geo.sectional(&coord_vec(2, 0), &coord_vec(2, 1))? - gaussian_curvature(x.x[0])).abs())
    }));
    // region 0 is t ∈ (0,1), region 1 is t > 1
    out.push(scenario_sweep("classified", "K<0 for t^2<1 and K>0 for t^2>1 (violations)", 0.5, |s, x, i| {
        let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
        let k = fg.geo.sectional(&coord_vec(2, 0), &coord_vec(2, 1))?;
        let ok = if i % 2 == 0 { k < 0.0 } else { k > 0.0 };
        Ok(f64::from(u8::from(!ok)))
    }));
    for name in ["classified", "classified-n2", "classified-n3"] {
        out.push(scenario_sweep(name, "K_sigma - 2k^2/(k^2-1) with k = t", CONDITION_TOL, |s, x, _| {
            let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
            let jac = jacobi_from_geometry(&fg.geo, &fg.xi)?;
            let t = x.x[0];
            jac.eigenvalues.iter().map(|&ks| tg_condition_residual(t, ks).map(f64::abs)).try_fold(0.0, |a, r| Ok(f64::max(a, r?)))
        }));
        out.push(scenario_sweep(name, "leaf principal curvatures equal t", CONDITION_TOL, |s, x, _| {
            let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
            let leaf = leaf_data_at(&s.metric, &s.field, &fg)?;
            Ok(leaf.principal_curvatures.iter().map(|k| (k - x.x[0]).abs()).fold(0.0, f64::max))
        }));
    }
    out.push(scenario_sweep("sphere2", "condition residual equals -(1+k^2)/(k^2-1)", SPHERE_CONDITION_TOL, |s, x, _| {
        let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
        let leaf = leaf_data_at(&s.metric, &s.field, &fg)?;
        let k = leaf.principal_curvatures[0];
        let want = -(1.0 + k * k) / (k * k - 1.0);
        let got = curvature_adapted_residuals(&leaf)?;
        Ok((got[0] - want).abs() / want.abs().max(1.0))
    }));
    out
}

fn ode() -> Vec<Check> {
    let opts = OdeOptions::default();
    let mut out = Vec::new();
    let closed = 2.0 * 3f64.atan() + 1.0 / 3.0 - 2.0 * 2f64.atan() - 0.5;
    out.push(Check::from_result(
        "ode: u-span from k=2 to k=3 matches the implicit solution",
        ODE_TOL,
        integrate_k(2.0, Stop::TargetK(3.0), &opts).map(|tr| (tr.last().u - closed).abs()),
    ));
    for (k0, target) in [(1.5, 4.0), (3.0, 1.2), (0.3, 0.7), (0.8, 0.2), (-0.3, -0.7), (-2.0, -5.0), (-0.9, -0.1), (-1.1, -8.0)] {
        out.push(Check::from_result(
            format!("ode: implicit residual along k0={k0} -> k={target}"),
            ODE_TOL,
            integrate_k(k0, Stop::TargetK(target), &opts)
                .map(|tr| tr.implicit_residuals().iter().map(|r| r.abs()).fold(0.0, f64::max)),
        ));
    }
    out.push(Check::from_result(
        "ode: implicit solution is consistent with its derivative",
        ODE_TOL,
        (|| {
            let h = 1e-5;
            let mut worst: f64 = 0.0;
            for k in [0.3, 0.7, 1.5, 2.5, -0.4, -3.0] {
                let fd = (implicit_solution(k + h, 0.0)? - implicit_solution(k - h, 0.0)?) / (2.0 * h);
                let rhs = crate::ode::ode_rhs(k)?;
                worst = worst.max((fd * rhs - 1.0).abs());
            }
            Ok(worst)
        })(),
    ));
    out.push(Check::from_result(
        "ode: k0=0 stays at the fixed point",
        ODE_TOL,
        integrate_k(0.0, Stop::USpan(1.0), &opts).map(|tr| tr.states.iter().map(|s| s.k.abs()).fold(0.0, f64::max)),
    ));
    out.push(Check::from_result(
        "ode: k0=1 is rejected as a pole",
        0.5,
        Ok(match integrate_k(1.0, Stop::USpan(1.0), &opts) {
            Err(Error::Pole(_)) => 0.0,
            _ => 1.0,
        }),
    ));
    out
}

fn classified(tol: f64) -> Vec<Check> {
    let mut out = vec![scenario_sweep("classified", "totally geodesic (max |Omega|)", tol, |s, x, _| {
        let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
        Ok(omega_foliation_at(&fg, &leaf_data_at(&s.metric, &s.field, &fg)?).max_abs())
    })];
    out.push(scenario_sweep("classified", "general formula also vanishes", tol, |s, x, _| {
        let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
        Ok(omega_general_at(&fg, &field_frames(&fg, None)?).max_abs())
    }));
    out.push(scenario_sweep("sphere2", "minimal (trace norm)", tol, |s, x, _| {
        let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
        Ok(omega_foliation_at(&fg, &leaf_data_at(&s.metric, &s.field, &fg)?).trace_norm())
    }));
    let multi = if tol == TOL_ANALYTIC { MULTI_TG_TOL } else { tol };
    for name in ["classified-n2", "classified-n3"] {
        out.push(scenario_sweep(name, "totally geodesic (max |Omega|)", multi, |s, x, _| {
            let fg = FieldGeometry::at(&s.metric, &s.field, x)?;
            Ok(omega_foliation_at(&fg, &leaf_data_at(&s.metric, &s.field, &fg)?).max_abs())
        }));
    }
    out.push(scenario_sweep("classified", "profile curve is isometric to the t-line", ISOMETRY_TOL, |_, x, _| {
        let t = x.x[0];
        Ok(isometry_residual(t)?.abs())
    }));
    out.push(Check::from_result(
        "classified: profile point at t=2 is (0.4, 2.7, 8/3)",
        PROFILE_TOL,
        ClassifiedSurface::new(1.0, 1.2, 5.0, 1).and_then(|s| profile_curve(&s, 2.0)).map(|p| {
            (p.x - 0.4).abs().max((p.z - 2.7).abs()).max((p.k_gauss - 8.0 / 3.0).abs())
        }),
    ));
    out.push(Check::from_result(
        "classified: z(t) approaches 2 sqrt 2 at t=1000",
        ASYMPTOTE_TOL,
        Ok((profile_z(1e3) - 2.0 * 2f64.sqrt()).abs()),
    ));
    out
}
