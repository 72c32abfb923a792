use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use supernorm::gaussian::{expect_theta, heat_semigroup};
use supernorm::verify::{Gen, InstanceSpec, Shape};
use supernorm::{BijectionMap, CovariancePair, Cq, Layout, NElement, Scalar};

fn setup(sites: usize) -> (Arc<Layout>, Gen) {
    let spec = InstanceSpec { sites, ..InstanceSpec::default() };
    (Arc::new(Layout::supersymmetric(sites)), Gen::new(&spec, 0))
}

fn multiply(c: &mut Criterion) {
    let mut group = c.benchmark_group("multiply");
    for degree in [2u32, 4, 6] {
        let (layout, mut gen) = setup(2);
        let a: NElement<Cq> = gen.element(&layout, Shape::new(6, degree));
        let b: NElement<Cq> = gen.element(&layout, Shape::new(6, degree));
        group.bench_with_input(BenchmarkId::from_parameter(degree), &degree, |bench, _| {
            bench.iter(|| black_box(&a).mul(black_box(&b)))
        });
    }
    group.finish();
}

fn wick_routes(c: &mut Criterion) {
    let mut group = c.benchmark_group("wick");
    for sites in [1usize, 2, 3] {
        let (layout, mut gen) = setup(sites);
        let cov = CovariancePair::pair(&layout, gen.spd::<Cq>(sites), gen.symmetric_invertible(sites)).unwrap();
        let b = BijectionMap::for_covariance(&layout, &cov);
        let f: NElement<Cq> = gen.element(&layout, Shape::new(4, 4));
        group.bench_with_input(BenchmarkId::new("expect_theta", sites), &sites, |bench, _| {
            bench.iter(|| expect_theta(black_box(&f), &cov, &b).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("heat_semigroup", sites), &sites, |bench, _| {
            bench.iter(|| heat_semigroup(black_box(&f), &cov, &b, &Cq::from_i64(1)))
        });
    }
    group.finish();
}

criterion_group!(benches, multiply, wick_routes);
criterion_main!(benches);
