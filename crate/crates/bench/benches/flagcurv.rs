use abflag_core::catalog::{self, random_group_config};
use abflag_core::finsler::{FdScheme, DEFAULT_FD_STEP};
use abflag_core::flagcurv::{sample_flags, FinslerSpace};
use abflag_core::{FlagCurvatureOptions, InvariantMetric, Method, ReductivePair, Tolerances, Vector};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn su2_plus_r() -> FinslerSpace {
    let metric = InvariantMetric::standard(catalog::su2_plus_r(), ReductivePair::trivial(4)).unwrap();
    FinslerSpace::new(
        metric,
        Vector::from_column_slice(&[0., 0., 0., 0.5]),
        &Tolerances::default(),
    )
    .unwrap()
}

fn flag_curvature(c: &mut Criterion) {
    let s = su2_plus_r();
    let flag = sample_flags(s.metric().inner(), 1, 3).remove(0);
    let opts = FlagCurvatureOptions::default();
    let mut group = c.benchmark_group("flag_curvature");
    for m in [Method::General, Method::NaturallyReductive, Method::BiInvariant] {
        group.bench_function(m.as_str(), |b| {
            b.iter(|| s.flag_curvature(black_box(&flag), m, &opts).unwrap())
        });
    }
    group.finish();
}

fn scan(c: &mut Criterion) {
    let s = su2_plus_r();
    let opts = FlagCurvatureOptions::default();
    let mut group = c.benchmark_group("scan_flags");
    group.sample_size(20);
    for n in [100, 1000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| s.scan_flags(n, 7, Method::General, &opts).unwrap())
        });
    }
    group.finish();
}

fn g_y(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = random_group_config(&mut rng, 0.8);
    let d = abflag_core::FinslerData::new(cfg.metric.inner().clone(), cfg.x.clone(), 1e-12).unwrap();
    let flag = sample_flags(cfg.metric.inner(), 1, 5).remove(0);
    let (y, u) = (flag.y(), flag.u());
    let mut group = c.benchmark_group("g_y");
    group.bench_function("closed", |b| b.iter(|| d.g_y(black_box(y), u, u).unwrap()));
    group.bench_function("fd", |b| {
        b.iter(|| {
            d.g_y_fd(black_box(y), u, u, DEFAULT_FD_STEP, FdScheme::Central)
                .unwrap()
        })
    });
    group.bench_function("matrix", |b| b.iter(|| d.g_y_matrix(black_box(y)).unwrap()));
    group.finish();
}

criterion_group!(benches, flag_curvature, scan, g_y);
criterion_main!(benches);
