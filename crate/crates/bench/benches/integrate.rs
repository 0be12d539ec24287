use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use qtraj_bench::{fig4_state, pt_state};
use qtraj_core::fields::QuantumField;
use qtraj_core::integrate::{integrate_field, IntegratorConfig, Method};
use qtraj_core::scenario::{preset, run_scenario};

fn coherent_orbit(c: &mut Criterion) {
    let wf = fig4_state(60);
    let field = QuantumField::new(&wf);
    let x0 = Complex64::new(2.5, 0.0);
    let span = (0.0, std::f64::consts::TAU);
    let adaptive = IntegratorConfig::default().with_samples(500);
    let fixed = IntegratorConfig {
        method: Method::Rk4Fixed,
        dt_init: 1e-3,
        ..adaptive
    };
    let mut group = c.benchmark_group("ho_coherent_orbit");
    group.bench_function("rk45", |b| b.iter(|| integrate_field(&field, x0, span, &adaptive)));
    group.bench_function("rk4", |b| b.iter(|| integrate_field(&field, x0, span, &fixed)));
    group.finish();
}

fn pt_orbit(c: &mut Criterion) {
    let wf = pt_state();
    let field = QuantumField::new(&wf);
    let cfg = IntegratorConfig::default().with_samples(1000);
    c.bench_function("pt_coherent_orbit", |b| {
        b.iter(|| integrate_field(&field, Complex64::new(0.6, 0.0), (0.0, 10.0), &cfg))
    });
}

fn scenario(c: &mut Criterion) {
    let cfg = preset("fig3_classical_ho").expect("preset exists");
    let mut group = c.benchmark_group("scenario");
    group.sample_size(20);
    group.bench_function("fig3_classical_ho", |b| b.iter(|| run_scenario(&cfg, None)));
    group.finish();
}

criterion_group!(benches, coherent_orbit, pt_orbit, scenario);
criterion_main!(benches);
