//! Benchmarks for the hot paths of the laboratory: threshold exponents,
//! the radial mode solver, kernel moment evaluation, and the wave stepper.
//!
//! Workloads are deliberately small so `cargo test` (which runs each bench
//! once in test mode) stays quick; `cargo bench` gives the real timings.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use blowup_core::{
    evolve, solve_phi_with, thresholds, CauchyProblem, CoefficientProfile, GridSpec, RecordSpec,
    SolveOptions, TestFunctionField,
};

fn bench_thresholds(c: &mut Criterion) {
    let profile = CoefficientProfile::scattering(3, 1.0, 2.0);
    c.bench_function("thresholds/scattering_n3", |b| {
        b.iter(|| thresholds(black_box(&profile)).unwrap())
    });
}

fn bench_solve_phi(c: &mut Criterion) {
    let profile = CoefficientProfile::scattering(3, 1.0, 2.0);
    let opts = SolveOptions::default();
    c.bench_function("solve_phi/lambda1_to_1e3", |b| {
        b.iter(|| solve_phi_with(black_box(&profile), 1.0, 1e3, &opts).unwrap())
    });
    c.bench_function("solve_phi/lambda0_to_1e3", |b| {
        b.iter(|| solve_phi_with(black_box(&profile), 0.0, 1e3, &opts).unwrap())
    });
}

fn bench_bq(c: &mut Criterion) {
    let profile = CoefficientProfile::scattering(3, 1.0, 2.0);
    let field = TestFunctionField::new(&profile, 1.0, 10.0, 1.8, profile.radius).unwrap();
    c.bench_function("bq_order/t_1e3", |b| {
        b.iter(|| field.bq_order(black_box(1.0), black_box(1e3), black_box(0.5)).unwrap())
    });
}

fn bench_evolve(c: &mut Criterion) {
    let profile = CoefficientProfile::free(3);
    let mut problem = CauchyProblem::bump(&profile, 1.0, 2.0, 1.0);
    problem.nonlinear = false;
    let spec = GridSpec {
        dr: 0.1,
        cfl: 0.45,
        t_max: 5.0,
        r_max: Some(8.0),
    };
    c.bench_function("evolve/linear_t5_dr0.1", |b| {
        b.iter(|| evolve(black_box(&problem), &spec, &RecordSpec::diagnostics_only(8)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_thresholds,
    bench_solve_phi,
    bench_bq,
    bench_evolve
);
criterion_main!(benches);
