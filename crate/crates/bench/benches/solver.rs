use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kinwave::{
    run_example, solve_forward, BoundaryField, BoundaryForcing, Example, ExperimentConfig, InitialData, InverseProblem,
    Measurement, Mesh, SeparableProblem,
};
use ndarray::Array2;

fn mesh(cells: usize) -> Mesh {
    Mesh::uniform(1.0, cells, 2.0, 0.9).unwrap()
}

fn forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    for cells in [100, 200, 400] {
        let m = mesh(cells);
        let source = Array2::from_shape_fn(m.shape(), |(n, i)| (m.time.t(n) * m.space.x(i)).sin());
        let bc = BoundaryForcing::zeros(&m);
        let init = InitialData::zeros(&m);
        group.bench_with_input(BenchmarkId::from_parameter(cells), &m, |b, m| {
            b.iter(|| solve_forward(m, black_box(source.view()), &bc, &init).unwrap())
        });
    }
    group.finish();
}

fn gradient(c: &mut Criterion) {
    let m = mesh(100);
    let data = BoundaryField::from_fn(m.space, |x| x * (1.0 - x));
    let base = InverseProblem::new(m, InitialData::zeros(&m), Measurement::exact(data)).unwrap();
    let problem = SeparableProblem::unmodulated(base);
    let f = BoundaryField::from_fn(m.space, |x| x.cos());
    c.bench_function("spatial gradient nx=100", |b| {
        b.iter(|| problem.evaluate(black_box(&f), 1e-8).unwrap())
    });
}

fn reconstruction(c: &mut Criterion) {
    let cfg = ExperimentConfig::default();
    let mut group = c.benchmark_group("cg example 1");
    group.sample_size(20);
    group.bench_function("noise-free", |b| {
        b.iter(|| run_example(Example::One, &[0.0], &[1], &cfg).unwrap())
    });
    group.bench_function("1% noise", |b| {
        b.iter(|| run_example(Example::One, &[0.01], &[1], &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, forward, gradient, reconstruction);
criterion_main!(benches);
