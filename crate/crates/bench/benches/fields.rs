use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use qtraj_bench::{fig4_state, pt_state};
use qtraj_core::fields::quantum_velocity;

fn series(c: &mut Criterion) {
    let x = Complex64::new(1.3, 0.4);
    let mut group = c.benchmark_group("ho_series_velocity");
    for n_max in [10, 20, 40, 60] {
        let wf = fig4_state(n_max);
        group.bench_with_input(BenchmarkId::from_parameter(n_max), &wf, |b, wf| {
            b.iter(|| quantum_velocity(wf, black_box(x), black_box(0.7)))
        });
    }
    group.finish();
}

fn poschl_teller(c: &mut Criterion) {
    let wf = pt_state();
    let x = Complex64::new(0.6, 0.1);
    c.bench_function("pt_coherent_velocity", |b| {
        b.iter(|| quantum_velocity(&wf, black_box(x), black_box(0.7)))
    });
}

criterion_group!(benches, series, poschl_teller);
criterion_main!(benches);
