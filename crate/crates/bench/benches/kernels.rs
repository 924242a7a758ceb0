use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use steinctrl::bandwidth::golden_section_max;
use steinctrl::experiment::test_function;
use steinctrl::{
    estimate_cf, fit, sample_iid_uniform, BaseKernel, BoundaryWeight, GramKind, ModifiedKernel, RadialProfile,
    SplitDataset, SteinKernel,
};

fn kernel(d: usize) -> SteinKernel {
    let base = BaseKernel::new(RadialProfile::wendland(1, d).unwrap(), 0.8).unwrap();
    SteinKernel::uniform(ModifiedKernel::new(base, BoundaryWeight::unit_cube(d)).unwrap())
}

fn gram(c: &mut Criterion) {
    let mut g = c.benchmark_group("gram");
    for n in [64, 256] {
        let sk = kernel(2);
        let pts = sample_iid_uniform(n, 2, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &pts, |b, pts| {
            b.iter(|| sk.gram(black_box(pts), GramKind::KPlus).unwrap())
        });
    }
    g.finish();
}

fn fitting(c: &mut Criterion) {
    let sk = kernel(1);
    let pts = sample_iid_uniform(128, 1, 2);
    let f: Vec<f64> = pts.iter().map(|x| test_function(1, x)).collect();
    c.bench_function("fit/128", |b| b.iter(|| fit(&sk, black_box(&pts), &f).unwrap()));
    let data = SplitDataset::new(pts.clone(), f.clone(), 0.5).unwrap();
    c.bench_function("estimate_cf/128", |b| b.iter(|| estimate_cf(&sk, black_box(&data)).unwrap()));
}

fn golden(c: &mut Criterion) {
    c.bench_function("golden/quadratic", |b| {
        b.iter(|| golden_section_max(|h| -(h - 1.3) * (h - 1.3), 0.0, black_box(10.0), 10))
    });
}

criterion_group!(benches, gram, fitting, golden);
criterion_main!(benches);
