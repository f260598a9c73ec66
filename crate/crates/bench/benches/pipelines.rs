use criterion::{black_box, criterion_group, criterion_main, Criterion};

use darboux_bench::{focal_normal_form, workload};
use darboux_core::constructions::{verify, Environment};
use darboux_core::darboux::{deg_x, kernel_space};
use darboux_core::eta::certificate_search;
use darboux_core::focal::{default_ambient, focal_jacobian, focal_values, Gauge};
use darboux_core::local::local_invariants;

fn global_invariants(c: &mut Criterion) {
    let w = workload("9.6");
    c.bench_function("deg_x 9.6", |b| b.iter(|| deg_x(black_box(&w.union)).unwrap()));
    c.bench_function("kernel_space 9.6 d=3", |b| {
        b.iter(|| kernel_space(black_box(&w.union), 3).unwrap())
    });
    let omega = w.form.clone().unwrap();
    c.bench_function("certificate_search 9.6", |b| {
        b.iter(|| certificate_search(black_box(&omega), &w.groups).unwrap())
    });
}

fn local(c: &mut Criterion) {
    let w = workload("9.6");
    let four_fold = w.points.iter().find(|p| p.label == "C").unwrap().clone();
    c.bench_function("local_invariants ordinary 4-fold", |b| {
        b.iter(|| local_invariants(black_box(&w.union.poly), &four_fold).unwrap())
    });
    let w = workload("9.8");
    let tacnode = w.points.iter().find(|p| p.label == "B").unwrap().clone();
    c.bench_function("local_invariants tacnode over F_p", |b| {
        b.iter(|| local_invariants(black_box(&w.union.poly), &tacnode).unwrap())
    });
}

fn focal(c: &mut Criterion) {
    let nf = focal_normal_form("9.6");
    c.bench_function("focal_values N=10", |b| {
        b.iter(|| focal_values(black_box(&nf), 10, Gauge::XPowerZero).unwrap())
    });
    let dirs = default_ambient(nf.context(), nf.degree);
    let mut group = c.benchmark_group("jacobian");
    group.sample_size(10);
    group.bench_function("focal_jacobian 14x10", |b| {
        b.iter(|| focal_jacobian(black_box(&nf), &dirs, 10).unwrap())
    });
    group.finish();
}

fn end_to_end(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("quartic-d2", |b| {
        b.iter(|| verify(black_box("quartic-d2"), &Environment::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, global_invariants, local, focal, end_to_end);
criterion_main!(benches);
