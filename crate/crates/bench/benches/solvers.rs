use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fluxdamp_bench::{basis, potential, CAPACITANCE};
use fluxdamp_core::state::{lr_coefficients, make_lr_state};
use fluxdamp_core::units::kinetic_coefficient;
use fluxdamp_core::{
    flux_trace, run_trajectories, solve_spectrum, Grid, Localization, MeasurementCoupling,
    TrajectoryConfig,
};

fn spectrum(c: &mut Criterion) {
    let q = potential();
    let k = kinetic_coefficient(CAPACITANCE);
    let mut g = c.benchmark_group("solve_spectrum");
    g.sample_size(10);
    for n in [1001, 4001] {
        let grid = Grid::new(-0.8, 0.8, n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, grid| {
            b.iter(|| solve_spectrum(grid, k, |x| q.relative(x), 8).unwrap())
        });
    }
    g.finish();
}

fn trace(c: &mut Criterion) {
    let basis = basis(2001, 8);
    let lv = basis.levels();
    let rho = make_lr_state(Localization::Left, lv).unwrap();
    let kappa = MeasurementCoupling::relative_to_critical(lv, 1, 0, 1.0).unwrap();
    let times: Vec<f64> = (0..2000)
        .map(|i| i as f64 * 1e-3 * lv.tunneling_period())
        .collect();
    c.bench_function("flux_trace_2000", |b| {
        b.iter(|| flux_trace(&rho, lv, kappa, &times).unwrap())
    });
}

fn trajectories(c: &mut Criterion) {
    let basis = basis(2001, 4);
    let lv = basis.levels();
    let psi = lr_coefficients(Localization::Left, 4).unwrap();
    let kappa = MeasurementCoupling::relative_to_critical(lv, 1, 0, 1.0).unwrap();
    let t = lv.tunneling_period();
    let cfg = TrajectoryConfig::new(256, 7, t / 200.0, 10.0 * t).recording_every(100);
    let mut g = c.benchmark_group("quantum_jumps");
    g.sample_size(10);
    g.bench_function("256x2000_steps", |b| {
        b.iter(|| run_trajectories(&psi, lv, kappa, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, spectrum, trace, trajectories);
criterion_main!(benches);
