//! Invariants through the public API on randomly drawn points.

use proptest::prelude::*;
use tgfield_core::classified::{classified_field, classified_metric, gaussian_curvature};
use tgfield_core::geometry::{classify, omega_foliation, omega_general};
use tgfield_core::manifold::sectional_curvature;
use tgfield_core::report::build_report;
use tgfield_core::scenario::builtin;
use tgfield_core::{ChartMetric, ChartPoint, ClassifiedSurface, TangentVector, UnitField};

fn branch_t() -> impl Strategy<Value = f64> {
    prop_oneof![0.15..0.85f64, 1.15..8.0f64, -8.0..-1.15f64, -0.85..-0.15f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn classified_family_is_totally_geodesic(t in branch_t(), v in 0.0..6.28f64, a in 0.5..3.0f64) {
        let (lo, hi) = if t.abs() < 1.0 { (0.1, 0.9) } else { (1.1, 9.0) };
        let (lo, hi) = if t < 0.0 { (-hi, -lo) } else { (lo, hi) };
        let s = ClassifiedSurface::new(a, lo, hi, 1).unwrap();
        let m = classified_metric(&s).unwrap();
        let f = classified_field(&m).unwrap();
        let x = ChartPoint::new(&[t, v]);
        prop_assert!(omega_foliation(&m, &f, &x).unwrap().max_abs() < 1e-8);
        prop_assert!(omega_general(&m, &f, &x).unwrap().max_abs() < 1e-8);
        // the curvature depends on t only, not on the scale a
        let k = sectional_curvature(&m, &TangentVector::new(&x, &[1.0, 0.0]), &TangentVector::new(&x, &[0.0, 1.0])).unwrap();
        prop_assert!((k - gaussian_curvature(t)).abs() < 1e-8 * gaussian_curvature(t).abs().max(1.0));
    }

    #[test]
    fn round_spheres_are_minimal_with_umbilic_omega(u in 0.3..2.8f64, r in 0.5..3.0f64) {
        let g = format!("{}", r * r);
        let gv = format!("{}*sin(u)^2", r * r);
        let m = ChartMetric::diagonal(&["u", "v"], &[g.as_str(), gv.as_str()]).unwrap();
        let f = UnitField::symbolic(&m, &[format!("{}", 1.0 / r), "0".into()]).unwrap();
        let om = omega_foliation(&m, &f, &ChartPoint::new(&[u, 0.4])).unwrap();
        let c = classify(&om, 1e-8);
        prop_assert!(c.minimal);
        // umbilic leaves: ((k²−1)K − 2k²)/(2(1+k²)) with K = 1/r², k = cot(u)/r
        let k2 = (u.cos() / u.sin() / r).powi(2);
        let want = ((k2 - 1.0) / (r * r) - 2.0 * k2) / (2.0 * (1.0 + k2));
        prop_assert!((om.get(1, 1, 0) - want).abs() < 1e-9, "{} vs {}", om.get(1, 1, 0), want);
    }
}

#[test]
fn reports_are_reproducible() {
    let s = builtin("classified-n3").unwrap();
    assert_eq!(build_report(&s, 6, None).unwrap(), build_report(&s, 6, None).unwrap());
}
