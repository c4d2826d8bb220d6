use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use equimap::energy::energy_split;
use equimap::families::random_perturbed;
use equimap::flow::Stepper;
use equimap::gauge::gauge_field;
use equimap::linops::spectrum_h;
use equimap::projection::project;
use equimap::RadialGrid;

fn derivatives(c: &mut Criterion) {
    let mut group = c.benchmark_group("deriv_y");
    for n in [513, 2049, 8193] {
        let g = RadialGrid::new(1, -12.0, 12.0, n).unwrap();
        let f: Vec<f64> = g.y().iter().map(|y| y.tanh()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| g.deriv_y(black_box(&f))));
    }
    group.finish();
}

fn kernels(c: &mut Criterion) {
    let g = RadialGrid::standard(1).unwrap().shared();
    let v = random_perturbed(g.clone(), 11);
    c.bench_function("energy_split", |b| b.iter(|| energy_split(black_box(&v)).unwrap()));
    c.bench_function("gauge_field", |b| b.iter(|| gauge_field(black_box(&v)).unwrap()));
    c.bench_function("project", |b| b.iter(|| project(black_box(&v)).unwrap()));
    c.bench_function("spectrum_h_k2", |b| b.iter(|| spectrum_h(black_box(&g), 2).unwrap()));

    let st = Stepper::new(g.clone(), 0.01, 1e-12, v.values());
    c.bench_function("flow_step", |b| {
        b.iter_batched(
            || v.values().to_vec(),
            |mut x| st.step(&mut x, 0.0).unwrap(),
            criterion::BatchSize::LargeInput,
        )
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = derivatives, kernels
}
criterion_main!(benches);
