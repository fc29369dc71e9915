//! Acceptance criteria 1–10. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion does. Tolerances are fixed here.

use std::f64::consts::PI;
use std::process::Command;

use tgfield_core::classified::{gaussian_curvature, isometry_residual, profile_curve, profile_z};
use tgfield_core::geometry::{lemma3_identities, leaf_data, omega_foliation, omega_general, tg_condition_residual};
use tgfield_core::manifold::{jacobi_operator, sectional_curvature};
use tgfield_core::ode::integrate_k;
use tgfield_core::oracle::brute_second_fundamental_form;
use tgfield_core::sampling::sample_points;
use tgfield_core::scenario::builtin;
use tgfield_core::verify::run;
use tgfield_core::{ChartPoint, ClassifiedSurface, OdeOptions, Result, Scenario, Stop, Suite, TangentVector, UnitField};

const ORACLE_TOL: f64 = 2e-4;
const ORACLE_TOL_N2: f64 = 5e-4;
const TG_TOL: f64 = 1e-6;
const CONDITION_TOL: f64 = 1e-9;
const SPHERE_CONDITION_TOL: f64 = 1e-8;
const SPHERE_OMEGA_TOL: f64 = 1e-6;
const TRACE_TOL: f64 = 1e-8;
const ODE_TOL: f64 = 1e-8;
const GAUSS_TOL: f64 = 1e-6;
const ISOMETRY_TOL: f64 = 1e-10;
const PROFILE_TOL: f64 = 1e-12;
const ASYMPTOTE_TOL: f64 = 1e-6;
const LEMMA3_TOL: f64 = 1e-6;
const MULTI_TG_TOL: f64 = 1e-5;
const POINTS: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(value: f64, tol: f64, what: &str) -> Outcome {
    Outcome { pass: value < tol, detail: format!("{what} = {value:.3e} (tol {tol:.0e})") }
}

fn scenario(name: &str) -> Scenario {
    builtin(name).expect("builtin scenario")
}

fn max_over(s: &Scenario, count: usize, mut f: impl FnMut(&ChartPoint, usize) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, x) in sample_points(&s.regions, count)?.iter().enumerate() {
        let v = f(x, i)?;
        if v.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(v);
    }
    Ok(worst)
}

fn field_vector(field: &UnitField, x: &ChartPoint) -> Result<TangentVector> {
    Ok(TangentVector::from_vector(x, field.value(x)?))
}

fn criterion_1() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, tol) in [
        ("flat2-parallel", ORACLE_TOL),
        ("flat3-parallel", ORACLE_TOL),
        ("sphere2", ORACLE_TOL),
        ("classified", ORACLE_TOL),
        ("classified-n2", ORACLE_TOL_N2),
    ] {
        let s = scenario(name);
        let dev = max_over(&s, POINTS, |x, _| {
            let analytic = omega_general(&s.metric, &s.field, x)?;
            let brute = brute_second_fundamental_form(&s.metric, &s.field, x)?;
            Ok(analytic.max_difference(&brute))
        })?;
        pass &= dev < tol;
        parts.push(format!("{name} {dev:.1e}/{tol:.0e}"));
    }
    Ok(Outcome { pass, detail: format!("max |general - oracle|: {}", parts.join(", ")) })
}

fn criterion_2() -> Result<Outcome> {
    let s = scenario("classified");
    // round-robin over the two branches: 20 points each
    let worst = max_over(&s, 2 * POINTS, |x, _| {
        let a = omega_foliation(&s.metric, &s.field, x)?.max_abs();
        let b = omega_general(&s.metric, &s.field, x)?.max_abs();
        Ok(a.max(b))
    })?;
    Ok(within(worst, TG_TOL, "classified max |Omega| over both branches"))
}

fn criterion_3() -> Result<Outcome> {
    let s = scenario("classified");
    let classified = max_over(&s, POINTS, |x, _| {
        let jac = jacobi_operator(&s.metric, &field_vector(&s.field, x)?)?;
        let t = x.x[0];
        let mut worst: f64 = 0.0;
        for &ks in jac.eigenvalues.iter() {
            worst = worst.max(tg_condition_residual(t, ks)?.abs());
        }
        Ok(worst)
    })?;
    let s = scenario("sphere2");
    let sphere = max_over(&s, POINTS, |x, _| {
        let k = leaf_data(&s.metric, &s.field, x)?.principal_curvatures[0];
        let ks = jacobi_operator(&s.metric, &field_vector(&s.field, x)?)?.eigenvalues[0];
        let want = -(1.0 + k * k) / (k * k - 1.0);
        Ok((tg_condition_residual(k, ks)? - want).abs())
    })?;
    Ok(Outcome {
        pass: classified < CONDITION_TOL && sphere < SPHERE_CONDITION_TOL,
        detail: format!(
            "classified residual {classified:.1e} (tol {CONDITION_TOL:.0e}); sphere deviation from -(1+k^2)/(k^2-1) {sphere:.1e} (tol {SPHERE_CONDITION_TOL:.0e})"
        ),
    })
}

fn criterion_4() -> Result<Outcome> {
    let s = scenario("sphere2");
    let (mut omega_dev, mut trace): (f64, f64) = (0.0, 0.0);
    for u in [PI / 6.0, PI / 4.0, PI / 3.0] {
        let x = ChartPoint::new(&[u, 0.5]);
        let om = omega_foliation(&s.metric, &s.field, &x)?;
        omega_dev = omega_dev.max((om.get(1, 1, 0) + 0.5).abs());
        trace = trace.max(om.trace_norm());
    }
    Ok(Outcome {
        pass: omega_dev < SPHERE_OMEGA_TOL && trace < TRACE_TOL,
        detail: format!(
            "|Omega_1|10 + 0.5| = {omega_dev:.1e} (tol {SPHERE_OMEGA_TOL:.0e}), trace {trace:.1e} (tol {TRACE_TOL:.0e})"
        ),
    })
}

fn criterion_5() -> Result<Outcome> {
    let closed = 2.0 * 3f64.atan() + 1.0 / 3.0 - 2.0 * 2f64.atan() - 0.5;
    let traj = integrate_k(2.0, Stop::TargetK(3.0), &OdeOptions::default())?;
    let du = traj.last().u - traj.states[0].u;
    Ok(within((du - closed).abs(), ODE_TOL, &format!("|du - closed form| (du = {du:.9})")))
}

fn criterion_6() -> Result<Outcome> {
    let s = scenario("classified");
    let mut sign_violations = 0;
    let dev = max_over(&s, POINTS, |x, i| {
        let e_t = TangentVector::new(x, &[1.0, 0.0]);
        let e_v = TangentVector::new(x, &[0.0, 1.0]);
        let k = sectional_curvature(&s.metric, &e_t, &e_v)?;
        let t2 = x.x[0] * x.x[0];
        // region 0: t in (0.2, 0.8); region 1: t in (1.2, 5)
        let expect_negative = i % 2 == 0;
        let in_range = if expect_negative { t2 > 0.04 && t2 < 0.64 } else { t2 > 1.44 && t2 < 25.0 };
        if !in_range || (expect_negative != (k < 0.0)) {
            sign_violations += 1;
        }
        Ok((k - gaussian_curvature(x.x[0])).abs())
    })?;
    Ok(Outcome {
        pass: dev < GAUSS_TOL && sign_violations == 0,
        detail: format!("|K - 2t^2/(t^2-1)| = {dev:.1e} (tol {GAUSS_TOL:.0e}), sign violations {sign_violations}"),
    })
}

fn criterion_7() -> Result<Outcome> {
    let mut iso: f64 = 0.0;
    for (lo, hi) in [(0.2, 0.8), (1.2, 5.0), (-5.0, -1.2), (-0.8, -0.2)] {
        for i in 0..=20 {
            let t = lo + (hi - lo) * i as f64 / 20.0;
            iso = iso.max(isometry_residual(t)?.abs());
        }
    }
    let p = profile_curve(&ClassifiedSurface::new(1.0, 1.2, 5.0, 1)?, 2.0)?;
    let triple = (p.x - 0.4).abs().max((p.z - 2.7).abs()).max((p.k_gauss - 8.0 / 3.0).abs());
    let asym = (profile_z(1e3) - 2.0 * 2f64.sqrt()).abs();
    Ok(Outcome {
        pass: iso < ISOMETRY_TOL && triple < PROFILE_TOL && asym < ASYMPTOTE_TOL,
        detail: format!(
            "isometry {iso:.1e} (tol {ISOMETRY_TOL:.0e}), t=2 triple {triple:.1e} (tol {PROFILE_TOL:.0e}), z(1e3) - 2sqrt2 {asym:.1e} (tol {ASYMPTOTE_TOL:.0e})"
        ),
    })
}

fn criterion_8() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for name in ["sphere2", "classified"] {
        let s = scenario(name);
        worst = worst.max(max_over(&s, POINTS, |x, _| Ok(lemma3_identities(&s.metric, &s.field, x)?.max()))?);
    }
    Ok(within(worst, LEMMA3_TOL, "max leaf-identity residual on sphere2 and classified"))
}

fn criterion_9() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for name in ["classified-n2", "classified-n3"] {
        let s = scenario(name);
        worst = worst.max(max_over(&s, POINTS, |x, _| Ok(omega_foliation(&s.metric, &s.field, x)?.max_abs()))?);
    }
    Ok(within(worst, MULTI_TG_TOL, "max |Omega| on classified-n2 and classified-n3"))
}

fn criterion_10() -> Result<Outcome> {
    let checks = run(Suite::All, None);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.description.as_str()).collect();
    let status = Command::new(env!("CARGO_BIN_EXE_tgfield"))
        .args(["verify", "--suite", "all"])
        .env_remove("TGFIELD_TOL")
        .output()
        .expect("binary runs")
        .status
        .code();
    Ok(Outcome {
        pass: failed.is_empty() && status == Some(0),
        detail: format!("{} checks, failed {:?}; `verify --suite all` exit {:?}", checks.len(), failed, status),
    })
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("oracle equivalence", criterion_1),
        ("classified metric is totally geodesic", criterion_2),
        ("curvature condition residuals", criterion_3),
        ("sphere: minimal, not totally geodesic", criterion_4),
        ("ODE agrees with implicit solution", criterion_5),
        ("Gaussian curvature of the classified metric", criterion_6),
        ("profile curve isometry and closed forms", criterion_7),
        ("leaf identity suite", criterion_8),
        ("higher-dimensional leaves", criterion_9),
        ("structural invariants and full verify run", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = f().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {:2} [{tag}] {name}: {}", i + 1, outcome.detail);
        failures += usize::from(!outcome.pass);
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
