use std::collections::BTreeSet;
use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use supernorm::norms::tphi_seminorm;
use supernorm::regulators::{log_regulator, RegulatorKind, RegulatorParams};
use supernorm::verify::{Gen, InstanceSpec, Shape};
use supernorm::{Layout, NElement, NormMode, NormParams, Scalar, Torus, Weight, C64};

fn tphi(c: &mut Criterion) {
    let spec = InstanceSpec::default();
    let mut gen = Gen::new(&spec, 0);
    let layout = Arc::new(Layout::supersymmetric(2));
    let f: NElement<C64> = gen.element(&layout, Shape::new(4, 3));
    let phi = gen.field(&layout, true);
    let mut group = c.benchmark_group("tphi");
    for mode in [NormMode::Exact, NormMode::Lp] {
        let p = NormParams::new(4, Weight::uniform(1.0, 2, 0, 2.0).unwrap(), mode);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |bench, _| {
            bench.iter(|| tphi_seminorm(black_box(&f), &phi, &p, None).unwrap())
        });
    }
    group.finish();
}

fn regulators(c: &mut Criterion) {
    let torus = Torus::new(1, 2, 4).unwrap();
    let spec = InstanceSpec::default();
    let mut gen = Gen::new(&spec, 1);
    let phi: Vec<C64> = gen.field_values::<C64>(torus.num_sites(), false).iter().map(Scalar::to_c64).collect();
    let reg = RegulatorParams::new(1.0, 1.0, 1, 1.1, 1.0).unwrap();
    let x: BTreeSet<usize> = torus.block_sites(0).into_iter().collect();
    let mut group = c.benchmark_group("log_regulator");
    for kind in [RegulatorKind::Fluctuation, RegulatorKind::LargeField] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{kind:?}")), &kind, |bench, &k| {
            bench.iter(|| log_regulator(k, &torus, black_box(&x), &phi, &reg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, tphi, regulators);
criterion_main!(benches);
