use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fringecorr::{displacement_analytic, displacement_exp, make_rho_ent, weyl_two, ComplexScalar};

fn displacement(c: &mut Criterion) {
    let lam = ComplexScalar::from_polar(0.7, 0.4);
    let mut group = c.benchmark_group("displacement");
    for dim in [16, 32, 64] {
        group.bench_with_input(BenchmarkId::new("analytic", dim), &dim, |b, &d| {
            b.iter(|| displacement_analytic(black_box(lam), d).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("expm", dim), &dim, |b, &d| {
            b.iter(|| displacement_exp(black_box(lam), d).unwrap())
        });
    }
    group.finish();
}

fn weyl(c: &mut Criterion) {
    let ent = make_rho_ent(8).unwrap();
    let (la, lb) = (ComplexScalar::new(0.0, 0.5), ComplexScalar::new(-0.2, 0.46));
    c.bench_function("weyl_two/ent_dim8", |b| {
        b.iter(|| weyl_two(black_box(&ent), la, lb).unwrap())
    });
}

criterion_group!(benches, displacement, weyl);
criterion_main!(benches);
