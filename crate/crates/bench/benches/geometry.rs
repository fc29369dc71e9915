use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tgfield_bench::fixture;
use tgfield_core::classified::mesh_export;
use tgfield_core::geometry::{omega_foliation, omega_general};
use tgfield_core::ode::integrate_k;
use tgfield_core::oracle::brute_second_fundamental_form;
use tgfield_core::report::build_report;
use tgfield_core::{ClassifiedSurface, FieldGeometry, OdeOptions, Stop};

fn point_formulas(c: &mut Criterion) {
    let mut group = c.benchmark_group("omega_at_point");
    for name in ["sphere2", "classified", "classified-n3"] {
        let (s, pts) = fixture(name, 1);
        let x = &pts[0];
        group.bench_with_input(BenchmarkId::new("field_geometry", name), x, |b, x| {
            b.iter(|| FieldGeometry::at(&s.metric, &s.field, black_box(x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("general", name), x, |b, x| {
            b.iter(|| omega_general(&s.metric, &s.field, black_box(x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("foliation", name), x, |b, x| {
            b.iter(|| omega_foliation(&s.metric, &s.field, black_box(x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("oracle", name), x, |b, x| {
            b.iter(|| brute_second_fundamental_form(&s.metric, &s.field, black_box(x)).unwrap())
        });
    }
    group.finish();
}

fn reports(c: &mut Criterion) {
    let mut group = c.benchmark_group("report");
    group.sample_size(20);
    for name in ["sphere2", "classified-n2"] {
        let (s, _) = fixture(name, 0);
        group.bench_function(name, |b| b.iter(|| build_report(&s, black_box(50), None).unwrap()));
    }
    group.finish();
}

fn ode(c: &mut Criterion) {
    let opts = OdeOptions::default();
    c.bench_function("ode_k2_to_k3", |b| b.iter(|| integrate_k(black_box(2.0), Stop::TargetK(3.0), &opts).unwrap()));
}

fn mesh(c: &mut Criterion) {
    let s = ClassifiedSurface::new(1.0, 1.2, 5.0, 1).unwrap();
    c.bench_function("mesh_200x64", |b| b.iter(|| mesh_export(&s, black_box(200), 64).unwrap().to_obj()));
}

criterion_group!(benches, point_formulas, reports, ode, mesh);
criterion_main!(benches);
