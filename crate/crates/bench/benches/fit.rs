use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rdwd_bench::dirichlet_training;
use rdwd_core::{fit, md_fit, RdwdConfig};

fn bench_rdwd(c: &mut Criterion) {
    let config = RdwdConfig::default();
    let mut group = c.benchmark_group("rdwd_fit");
    group.sample_size(10);
    for d in [10, 50, 1000] {
        let data = dirichlet_training(d, 20, 20, 1);
        group.bench_with_input(BenchmarkId::from_parameter(d), &data, |b, data| {
            b.iter(|| fit(data, &config).unwrap())
        });
    }
    group.finish();
}

fn bench_md(c: &mut Criterion) {
    let data = dirichlet_training(1000, 20, 50, 2);
    c.bench_function("md_fit/1000", |b| b.iter(|| md_fit(&data).unwrap()));
}

criterion_group!(benches, bench_rdwd, bench_md);
criterion_main!(benches);
