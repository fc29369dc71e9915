use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use super::*;
use crate::bundle::sasaki_inner_at;

fn flat(n: usize) -> ChartMetric {
    let coords: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    ChartMetric::diagonal(&coords, &vec!["1"; n]).unwrap()
}

fn sphere() -> (ChartMetric, UnitField) {
    let m = ChartMetric::diagonal(&["u", "v"], &["1", "sin(u)^2"]).unwrap();
    let f = UnitField::symbolic(&m, &["1", "0"]).unwrap();
    (m, f)
}

/// Classified metric with `a = 1` in `1 + n` dimensions and the unit field along `t`.
fn classified(n: usize) -> (ChartMetric, UnitField) {
    let mut coords = vec!["t".to_string()];
    let mut diag = vec!["(t^2-1)^2/(t^4*(t^2+1)^2)"];
    for a in 0..n {
        coords.push(format!("v{a}"));
        diag.push("t^2/(t^2+1)^2");
    }
    let m = ChartMetric::diagonal(&coords, &diag).unwrap();
    let mut comps = vec!["t^2*(t^2+1)/(t^2-1)".to_string()];
    comps.extend((0..n).map(|_| "0".to_string()));
    let f = UnitField::symbolic(&m, &comps).unwrap();
    (m, f)
}

fn p(c: &[f64]) -> ChartPoint {
    ChartPoint::new(c)
}

fn v(c: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(c)
}

#[test]
fn shape_operator_examples() {
    let m = flat(2);
    let f = UnitField::symbolic(&m, &["0.6", "0.8"]).unwrap();
    assert_eq!(shape_operator(&m, &f, &p(&[0.1, 0.2])).unwrap().matrix.amax(), 0.0);

    let (m, f) = sphere();
    let s = shape_operator(&m, &f, &p(&[PI / 4.0, 0.3])).unwrap();
    assert!((s.matrix.clone() - DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -1.0])).amax() < 1e-12);
    assert!((s.frame.column(1) - v(&[0.0, 2f64.sqrt()])).amax() < 1e-12);

    let (m, f) = classified(1);
    let s = shape_operator(&m, &f, &p(&[2.0, 0.0])).unwrap();
    assert!((s.matrix.clone() - DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0])).amax() < 1e-12);
}

#[test]
fn conjugate_examples() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 4.0]);
    assert_eq!(conjugate_shape_operator(&a), DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 3.0, 4.0]));
    let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]);
    assert_eq!(conjugate_shape_operator(&s), s);
    // A*ξ = 0 for a rotating field on a warped metric
    let m = ChartMetric::diagonal(&["u", "v"], &["1", "(2+sin(u))^2"]).unwrap();
    let f = UnitField::symbolic(&m, &["cos(0.3*u+0.2*v)", "sin(0.3*u+0.2*v)/(2+sin(u))"]).unwrap();
    let s = shape_operator(&m, &f, &p(&[0.7, -0.4])).unwrap();
    assert!((conjugate_shape_operator(&s.matrix) * s.xi_local()).amax() < 1e-12);
}

#[test]
fn singular_frames_examples() {
    let xi = v(&[1.0, 0.0, 0.0]);
    let zero = singular_frames(&DMatrix::zeros(3, 3), Some(&xi), FrameMode::Unsigned).unwrap();
    assert_eq!(zero.lambda, DVector::zeros(3));
    assert!((zero.e.clone() - DMatrix::identity(3, 3)).amax() < 1e-15);
    assert!((zero.f.clone() - DMatrix::identity(3, 3)).amax() < 1e-15);

    let diag = DMatrix::from_diagonal(&v(&[0.0, 2.0, -3.0]));
    let s = singular_frames(&diag, Some(&xi), FrameMode::Signed).unwrap();
    assert!(s.signed);
    assert!((s.lambda.clone() - v(&[0.0, 2.0, -3.0])).amax() < 1e-14);
    assert!((s.e.clone() - DMatrix::identity(3, 3)).amax() < 1e-14);
    assert_eq!(s.e, s.f);

    let a = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 4.0]);
    let s = singular_frames(&a, None, FrameMode::Unsigned).unwrap();
    assert!((s.lambda[1] - 5.0).abs() < 1e-12);
    assert!((s.e.column(1) - v(&[0.0, 1.0])).amax() < 1e-12);
    assert!((s.f.column(1) - v(&[0.6, 0.8])).amax() < 1e-12);
    assert!(s.relation_residual(&a) < 1e-12);
    assert!(s.orthonormality_residual() < 1e-12);
}

#[test]
fn signed_mode_rejects_asymmetric_operator() {
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.5, 0.0, 0.0, 1.0]);
    let xi = v(&[1.0, 0.0, 0.0]);
    assert!(matches!(singular_frames(&a, Some(&xi), FrameMode::Signed), Err(Error::NotSelfAdjoint(_))));
    let s = singular_frames(&a, Some(&xi), FrameMode::Unsigned).unwrap();
    assert!(s.relation_residual(&a) < 1e-10);
    assert!(s.lambda[1] >= s.lambda[2]);
}

#[test]
fn ambiguous_kernel_when_xi_is_orthogonal_to_it() {
    // ker A = span(e2, e3), ξ = e1 not in the kernel
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let xi = v(&[1.0, 0.0, 0.0]);
    assert!(matches!(singular_frames(&a, Some(&xi), FrameMode::Unsigned), Err(Error::AmbiguousKernel(2))));
    // ξ partly in a two-dimensional kernel: e_0 is its projection
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
    let xi = v(&[0.6, 0.8, 0.0]);
    let s = singular_frames(&a, Some(&xi), FrameMode::Unsigned).unwrap();
    assert!((s.e.column(0) - &xi).amax() < 1e-12);
    assert!(s.relation_residual(&a) < 1e-12);
}

/// Matrices in a frame whose first axis is ξ with first row zero (image ⊥ ξ).
fn shape_like(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |c| {
        let mut a = DMatrix::from_row_slice(n, n, &c);
        a.row_mut(0).fill(0.0);
        a
    })
}

proptest! {
    #[test]
    fn unsigned_frames_satisfy_relations(a in (2usize..5).prop_flat_map(shape_like)) {
        let n = a.nrows();
        let mut xi = DVector::zeros(n);
        xi[0] = 1.0;
        match singular_frames(&a, Some(&xi), FrameMode::Unsigned) {
            Ok(s) => {
                prop_assert!(s.relation_residual(&a) < 1e-8);
                prop_assert!(s.orthonormality_residual() < 1e-10);
                prop_assert!((s.f.column(0) - &xi).amax() < 1e-12);
                for i in 1..n - 1 {
                    prop_assert!(s.lambda[i] >= s.lambda[i + 1]);
                }
                prop_assert_eq!(s.lambda[0], 0.0);
            }
            Err(e) => prop_assert!(matches!(e, Error::AmbiguousKernel(_))),
        }
    }

    #[test]
    fn signed_frames_on_symmetric_blocks(c in prop::collection::vec(-3.0f64..3.0, 9)) {
        let mut a = DMatrix::zeros(4, 4);
        let s = DMatrix::from_row_slice(3, 3, &c);
        a.view_mut((1, 1), (3, 3)).copy_from(&(&s + s.transpose()));
        let xi = v(&[1.0, 0.0, 0.0, 0.0]);
        let fr = singular_frames(&a, Some(&xi), FrameMode::Signed).unwrap();
        prop_assert!(fr.relation_residual(&a) < 1e-8);
        prop_assert!(fr.orthonormality_residual() < 1e-10);
        prop_assert_eq!(&fr.e, &fr.f);
    }
}

fn warped_fields() -> Vec<(ChartMetric, UnitField)> {
    ["1+u^2", "2+sin(u)", "exp(u/3)"]
        .iter()
        .map(|f| {
            let m = ChartMetric::diagonal(&["u", "v"], &["1", &format!("({f})^2")]).unwrap();
            let field = UnitField::symbolic(&m, &["cos(0.4*u-0.3*v)", &format!("sin(0.4*u-0.3*v)/({f})")]).unwrap();
            (m, field)
        })
        .collect()
}

#[test]
fn field_frames_are_orthonormal_and_singular() {
    let mut cases = warped_fields();
    cases.push(sphere());
    cases.push(classified(1));
    cases.push(classified(2));
    for (m, f) in cases {
        let d = m.dim();
        for i in 0..25 {
            let s = 0.2 + 0.025 * i as f64;
            let mut c = vec![s; d];
            if m.coords()[0] == "t" {
                c[0] = if i % 2 == 0 { 0.25 + 0.02 * i as f64 } else { 1.3 + 0.1 * i as f64 };
            }
            let fg = FieldGeometry::at(&m, &f, &p(&c)).unwrap();
            let fr = field_frames(&fg, None).unwrap();
            let g = &fg.geo.g;
            let id = DMatrix::<f64>::identity(d, d);
            assert!((fr.e.transpose() * g * &fr.e - &id).amax() < 1e-10);
            assert!((fr.f.transpose() * g * &fr.f - &id).amax() < 1e-10);
            for k in 0..d {
                let ae = fg.shape(&fr.e(k));
                assert!((ae - fr.f(k) * fr.lambda(k)).amax() < 1e-8);
            }
            assert!(fr.local.relation_residual(&fr.shape.matrix) < 1e-8);
        }
    }
}

#[test]
fn submanifold_frames_examples() {
    let m = flat(3);
    let f = UnitField::symbolic(&m, &["0", "0", "1"]).unwrap();
    let fg = FieldGeometry::at(&m, &f, &p(&[0.1, 0.2, 0.3])).unwrap();
    let fr = field_frames(&fg, None).unwrap();
    let sf = submanifold_frames(&fg, &fr);
    for (i, t) in sf.tangent.iter().enumerate() {
        assert_eq!(t.dx, fr.e(i));
        assert_eq!(t.du.amax(), 0.0);
    }
    for (s, nrm) in sf.normal.iter().enumerate() {
        assert_eq!(nrm.dx.amax(), 0.0);
        assert_eq!(nrm.du, fr.f(s + 1));
    }

    let (m, f) = sphere();
    let u = PI / 4.0;
    let fg = FieldGeometry::at(&m, &f, &p(&[u, 0.0])).unwrap();
    let fr = field_frames(&fg, None).unwrap();
    assert!((fr.lambda(1) + 1.0).abs() < 1e-12);
    let sf = submanifold_frames(&fg, &fr);
    let e1 = fr.e(1);
    let r2 = 2f64.sqrt();
    // horizontal lift of e_1 at ξ = ∂_u: (e_1, −Γ(e_1, ∂_u))
    let gam = fg.geo.gamma.contract(&e1, &fg.xi);
    assert!((&sf.tangent[1].dx - &e1 / r2).amax() < 1e-12);
    assert!((&sf.tangent[1].du - (-&gam + &e1) / r2).amax() < 1e-12);
    assert!((&sf.normal[0].dx + &e1 / r2).amax() < 1e-12);
    assert!((&sf.normal[0].du - (&gam + &e1) / r2).amax() < 1e-12);
}

#[test]
fn submanifold_frames_are_sasaki_orthonormal() {
    let mut cases = warped_fields();
    cases.push(sphere());
    cases.push(classified(2));
    for (m, f) in cases {
        for i in 0..10 {
            let mut c = vec![0.3 + 0.1 * i as f64; m.dim()];
            if m.coords()[0] == "t" {
                c[0] = 1.5 + 0.3 * i as f64;
            }
            let fg = FieldGeometry::at(&m, &f, &p(&c)).unwrap();
            for mode in [None, Some(FrameMode::Unsigned)] {
                let fr = field_frames(&fg, mode).unwrap();
                let sf = submanifold_frames(&fg, &fr);
                let all: Vec<_> = sf.tangent.iter().chain(&sf.normal).collect();
                for (a, x) in all.iter().enumerate() {
                    for (b, y) in all.iter().enumerate() {
                        let expect = if a == b { 1.0 } else { 0.0 };
                        assert!((sasaki_inner_at(&fg.geo, x, y).unwrap() - expect).abs() < 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn flat_parallel_field_is_totally_geodesic() {
    for n in [2, 3] {
        let m = flat(n);
        let comps: Vec<String> = (0..n).map(|i| if i == n - 1 { "1".into() } else { "0".into() }).collect();
        let f = UnitField::symbolic(&m, &comps).unwrap();
        let x = p(&vec![0.3; n]);
        let om = omega_general(&m, &f, &x).unwrap();
        assert_eq!(om.max_abs(), 0.0);
        let c = classify(&om, 1e-6);
        assert!(c.totally_geodesic && c.minimal && c.max_abs == 0.0);
        let leaf = leaf_data(&m, &f, &x).unwrap();
        assert_eq!(leaf.principal_curvatures.amax(), 0.0);
        assert_eq!(leaf.b.amax(), 0.0);
        assert!(leaf.nabla_b.iter().all(|b| b.amax() == 0.0));
        assert_eq!(lemma3_identities(&m, &f, &x).unwrap().max(), 0.0);
        assert_eq!(omega_foliation(&m, &f, &x).unwrap().max_abs(), 0.0);
    }
}

#[test]
fn sphere_radial_field_is_minimal_not_totally_geodesic() {
    let (m, f) = sphere();
    for u in [PI / 6.0, PI / 4.0, PI / 3.0, 2.0] {
        let x = p(&[u, 0.4]);
        let om = omega_general(&m, &f, &x).unwrap();
        assert!((om.get(1, 1, 0) + 0.5).abs() < 1e-10, "{}", om.get(1, 1, 0));
        assert!((om.get(1, 0, 1) + 0.5).abs() < 1e-10);
        assert!(om.get(1, 0, 0).abs() < 1e-12 && om.get(1, 1, 1).abs() < 1e-10);
        let c = classify(&om, 1e-6);
        assert!(c.minimal && !c.totally_geodesic);
        assert!((c.max_abs - 0.5).abs() < 1e-10);

        let fol = omega_foliation(&m, &f, &x).unwrap();
        assert!(fol.max_difference(&om) < 1e-10);
        let leaf = leaf_data(&m, &f, &x).unwrap();
        let k = -1.0 / u.tan();
        assert!((leaf.principal_curvatures[0] - k).abs() < 1e-12);
        assert!(leaf.nabla_b[0].amax() < 1e-12);
        let um = omega_umbilic_leaf(&leaf).unwrap();
        assert!((um[0] - fol.get(1, 1, 0)).abs() < 1e-12);
        match tg_condition_residual(k, leaf.jacobi[(0, 0)]) {
            Ok(res) => assert!((res + (1.0 + k * k) / (k * k - 1.0)).abs() < 1e-8),
            Err(e) => assert!(matches!(e, Error::UmbilicityPole(_)) && (k * k - 1.0).abs() < 1e-8),
        }
        assert!(lemma3_identities(&m, &f, &x).unwrap().max() < 1e-10);
    }
    let leaf = leaf_data(&m, &f, &p(&[PI / 3.0, 0.0])).unwrap();
    assert!((leaf.principal_curvatures[0] + 1.0 / 3f64.sqrt()).abs() < 1e-12);
    let fg = FieldGeometry::at(&m, &f, &p(&[PI / 4.0, 0.0])).unwrap();
    let e1 = v(&[0.0, 2f64.sqrt()]);
    assert!((fg.geo.inner(&fg.half(&e1, &fg.xi), &e1) + 1.0).abs() < 1e-12);
}

#[test]
fn unsigned_frames_flip_the_sphere_sign() {
    let (m, f) = sphere();
    let om = omega_general_with(&m, &f, &p(&[PI / 4.0, 0.0]), FrameMode::Unsigned).unwrap();
    assert!((om.get(1, 1, 0) - 0.5).abs() < 1e-10);
    assert!(classify(&om, 1e-6).minimal);
}

#[test]
fn classified_field_is_totally_geodesic() {
    for n in [1, 2, 3] {
        let (m, f) = classified(n);
        for t in [0.5, 2.0, 3.0, 0.3, 4.5] {
            let mut c = vec![0.1; n + 1];
            c[0] = t;
            let x = p(&c);
            let om = omega_general(&m, &f, &x).unwrap();
            assert!(om.max_abs() < 1e-6, "n={n} t={t} {}", om.max_abs());
            let fol = omega_foliation(&m, &f, &x).unwrap();
            assert!(fol.max_abs() < 1e-6);
            let leaf = leaf_data(&m, &f, &x).unwrap();
            assert!(leaf.principal_curvatures.iter().all(|k| (k - t).abs() < 1e-10));
            assert!(leaf.umbilic_defect(t) < 1e-8);
            for r in curvature_adapted_residuals(&leaf).unwrap() {
                assert!(r.abs() < 1e-9);
            }
            assert!(lemma3_identities(&m, &f, &x).unwrap().max() < 1e-6);
        }
    }
}

#[test]
fn umbilic_and_condition_examples() {
    assert_eq!(omega_umbilic(0.0, &[0.0]), vec![0.0]);
    assert!((omega_umbilic(-1.0, &[1.0])[0] + 0.5).abs() < 1e-15);
    assert!(omega_umbilic(2.0, &[8.0 / 3.0])[0].abs() < 1e-15);
    assert!(tg_condition_residual(2.0, 8.0 / 3.0).unwrap().abs() < 1e-15);
    assert_eq!(tg_condition_residual(0.0, 0.0).unwrap(), 0.0);
    let k = -1.0 / 3f64.sqrt();
    assert!((tg_condition_residual(k, 1.0).unwrap() - 2.0).abs() < 1e-12);
    assert!(matches!(tg_condition_residual(1.0, 0.0), Err(Error::UmbilicityPole(_))));
    assert!(matches!(curvature_adapted_residual(-1.0, 0.0), Err(Error::UmbilicityPole(_))));
}

// Geodesic, but ξ^⊥ is not integrable: ξ = (cos z, sin z, 0) on flat space.
fn twisted() -> (ChartMetric, UnitField) {
    let m = ChartMetric::diagonal(&["x", "y", "z"], &["1", "1", "1"]).unwrap();
    let f = UnitField::symbolic(&m, &["cos(z)", "sin(z)", "0"]).unwrap();
    (m, f)
}

#[test]
fn non_integrable_field_is_detected() {
    let (m, f) = twisted();
    let x = p(&[0.1, 0.2, 0.3]);
    assert!(matches!(leaf_data(&m, &f, &x), Err(Error::NotIntegrable(r)) if (r - 1.0).abs() < 1e-6));
    assert!(matches!(omega_foliation(&m, &f, &x), Err(Error::NotIntegrable(_))));
    assert!(matches!(lemma3_identities(&m, &f, &x), Err(Error::NotIntegrable(_))));
    // the general formula still applies; this helical field is a known
    // totally geodesic field with non-integrable complement
    let om = omega_general(&m, &f, &x).unwrap();
    assert!(om.symmetry_residual() < 1e-12);
    assert!(om.max_abs() < 1e-12);
}

#[test]
fn integrability_matches_shape_operator_asymmetry() {
    // for a geodesic field ⟨[Y,Z],ξ⟩ = ⟨AY,Z⟩ − ⟨AZ,Y⟩
    let m = ChartMetric::diagonal(&["x", "y", "z"], &["1", "1", "1"]).unwrap();
    for w in [0.5, 1.0, 2.0] {
        let f = UnitField::symbolic(&m, &[format!("cos({w}*z)"), format!("sin({w}*z)"), "0".into()]).unwrap();
        for x in [[0.1, 0.2, 0.3], [-1.0, 0.5, 2.0]] {
            let x = p(&x);
            let r = integrability_residual(&m, &f, &x).unwrap();
            let s = shape_operator(&m, &f, &x).unwrap();
            let sub = s.matrix.view((1, 1), (2, 2)).clone_owned();
            let asym = (&sub - sub.transpose()).amax();
            assert!((r - asym).abs() < 1e-7, "{r} {asym}");
        }
    }
}

#[test]
fn non_geodesic_field_is_rejected() {
    let m = flat(2);
    let f = UnitField::symbolic(&m, &["cos(x1)", "sin(x1)"]).unwrap();
    let x = p(&[0.2, 0.7]);
    assert!(matches!(leaf_data(&m, &f, &x), Err(Error::NotGeodesic(_))));
    // unsigned frames, with e_0 spanning ker A (not ξ)
    let om = omega_general(&m, &f, &x).unwrap();
    assert!(!om.frame.signed);
}

#[test]
fn frame_mismatch_is_reported() {
    // B diagonal in (v1, v2) while the Jacobi operator mixes them.
    let m = ChartMetric::symbolic(
        &["t", "a", "b"],
        &[
            vec!["1".into(), "0".into(), "0".into()],
            vec!["0".into(), "exp(2*t)".into(), "0.3*t^2".into()],
            vec!["0".into(), "0.3*t^2".into(), "exp(4*t)".into()],
        ],
    )
    .unwrap();
    let f = UnitField::symbolic(&m, &["1", "0", "0"]).unwrap();
    let leaf = leaf_data(&m, &f, &p(&[0.4, 0.0, 0.0])).unwrap();
    assert!(leaf.umbilicity(UMBILIC_TOL).is_none());
    assert!(matches!(curvature_adapted_residuals(&leaf), Err(Error::FrameMismatch { .. })));
    // the foliation formula still agrees with the general one
    let fg = FieldGeometry::at(&m, &f, &p(&[0.4, 0.0, 0.0])).unwrap();
    let fol = omega_foliation_at(&fg, &leaf);
    let gen = omega_general_at(&fg, &field_frames(&fg, Some(FrameMode::Signed)).unwrap());
    assert!(fol.max_difference(&gen) < 1e-8, "{}", fol.max_difference(&gen));
}

/// Geodesic fields with integrable complements on warped products
/// `dt² + Σ f_a(t)² (dv^a)²`.
fn warped3() -> Vec<(ChartMetric, UnitField)> {
    [("exp(t)", "1+t^2"), ("2+sin(t)", "2+cos(t)"), ("t", "t")]
        .iter()
        .map(|(f1, f2)| {
            let m = ChartMetric::diagonal(&["t", "a", "b"], &["1", &format!("({f1})^2"), &format!("({f2})^2")]).unwrap();
            let f = UnitField::symbolic(&m, &["1", "0", "0"]).unwrap();
            (m, f)
        })
        .collect()
}

#[test]
fn foliation_and_general_formulas_agree() {
    // (metric, field, first coordinate of the sample points)
    let mut cases: Vec<(ChartMetric, UnitField, f64)> = warped3().into_iter().map(|(m, f)| (m, f, 0.4)).collect();
    for n in [2, 3] {
        let (m, f) = classified(n);
        cases.push((m, f, 1.3));
    }
    let (m, f) = sphere();
    cases.push((m, f, 0.4));
    for (m, f, t0) in cases {
        for i in 0..8 {
            let mut c = vec![0.2 * i as f64 - 0.5; m.dim()];
            c[0] = t0 + 0.3 * i as f64;
            let x = p(&c);
            let fg = FieldGeometry::at(&m, &f, &x).unwrap();
            let leaf = leaf_data_at(&m, &f, &fg).unwrap();
            let fol = omega_foliation_at(&fg, &leaf);
            let gen = omega_general_at(&fg, &field_frames(&fg, Some(FrameMode::Signed)).unwrap());
            assert!(fol.max_difference(&gen) < 1e-6, "{}", fol.max_difference(&gen));
            assert!(fol.symmetry_residual() < 1e-8 && gen.symmetry_residual() < 1e-8);
            for s in 1..=fol.normal_dim() {
                assert!(fol.get(s, 0, 0).abs() < 1e-9);
            }
            assert!(lemma3_identities_at(&fg, &leaf).max() < 1e-6);
            let (b, n) = (&leaf.b, leaf.dim());
            assert!((b - b.transpose()).amax() < 1e-10);
            if let Some(k) = leaf.umbilicity(UMBILIC_TOL) {
                assert!(leaf.umbilic_defect(k) < 1e-8);
                let um = omega_umbilic_leaf(&leaf).unwrap();
                for s in 1..=n {
                    for i in 0..=n {
                        for j in 0..=n {
                            let pair = (i == s && j == 0) || (i == 0 && j == s);
                            if !pair {
                                assert!(fol.get(s, i, j).abs() < 1e-6);
                            }
                        }
                    }
                    assert!((fol.get(s, s, 0) - um[s - 1]).abs() < 1e-6);
                }
            }
        }
    }
}

#[test]
fn classification_is_invariant_under_frame_reordering() {
    let mut cases = warped3();
    cases.push(classified(3));
    for (m, f) in cases {
        let mut c = vec![0.3; m.dim()];
        c[0] = 1.7;
        let fg = FieldGeometry::at(&m, &f, &p(&c)).unwrap();
        let fr = field_frames(&fg, None).unwrap();
        let n = fr.dim() - 1;
        let rev: Vec<usize> = (0..n).rev().collect();
        let reversed = FieldFrames::new(fr.shape.clone(), fr.local.reordered(&rev));
        let a = classify(&omega_general_at(&fg, &fr), 1e-6);
        let b = classify(&omega_general_at(&fg, &reversed), 1e-6);
        assert_eq!((a.totally_geodesic, a.minimal), (b.totally_geodesic, b.minimal));
        assert!((a.max_abs - b.max_abs).abs() < 1e-9);
        assert!((a.trace_norm - b.trace_norm).abs() < 1e-9);
    }
}
