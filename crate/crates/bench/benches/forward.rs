use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use se2_nngp::kernel::empirical_kernel;
use se2_nngp::scnn::{forward, sample_filters};
use se2_nngp_bench::network;

fn forward_pass(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    for width in [64, 256, 512] {
        let net = network(2, width, 8);
        let x = net.input_field().unwrap();
        group.bench_with_input(BenchmarkId::new("sample_filters", width), &net, |b, net| {
            b.iter(|| sample_filters(net, 3))
        });
        let filters = sample_filters(&net, 3);
        group.bench_with_input(BenchmarkId::new("forward", width), &net, |b, net| {
            b.iter(|| forward(net, &filters, &x).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("empirical_kernel");
    group.sample_size(10);
    let net = network(1, 256, 8);
    let x = net.input_field().unwrap();
    group.bench_function("L1_w256_M64", |b| b.iter(|| empirical_kernel(&net, &x, 1, 64, 5).unwrap()));
    group.finish();
}

criterion_group!(benches, forward_pass);
criterion_main!(benches);
