use criterion::{black_box, criterion_group, criterion_main, Criterion};

use speclift::engineering::{self, LiftTarget};
use speclift::estimation::{self, ProbeState, Spectrum};
use speclift::ioncompile::{self, IonState};
use speclift::optimize;
use speclift::priors::Prior;

fn bench_personick(c: &mut Criterion) {
    let prior = Prior::gaussian(0.0, 1.0).unwrap();
    let state = ProbeState::from_real(&[0.42, 0.57, 0.57, 0.42]).unwrap();
    let spectrum = Spectrum::new(vec![0.75, 0.25, -0.25, -0.75]).unwrap();
    let pair = estimation::averaged_pair(&prior, &state, &spectrum, 3.7).unwrap();
    c.bench_function("personick_solve_4level", |b| {
        b.iter(|| estimation::personick_solve(black_box(&pair)).unwrap())
    });
}

fn bench_grid_pair(c: &mut Criterion) {
    let grid = Prior::gaussian(0.0, 1.0).unwrap().grid_default().unwrap();
    let state = ProbeState::flat(4);
    let spectrum = Spectrum::equally_gapped(4);
    c.bench_function("averaged_pair_grid_prior", |b| {
        b.iter(|| estimation::averaged_pair(black_box(&grid), &state, &spectrum, 1.3).unwrap())
    });
}

fn bench_state_optimization(c: &mut Criterion) {
    let prior = Prior::gaussian(0.0, 1.0).unwrap();
    let spectrum = Spectrum::equally_gapped(5);
    c.bench_function("optimize_state_5level", |b| {
        b.iter(|| optimize::optimize_state(black_box(&prior), &spectrum, 3.0, 0).unwrap())
    });
}

fn bench_lift_simulation(c: &mut Criterion) {
    let spectrum = Spectrum::equally_gapped(6);
    let schedule = engineering::lift_times_from_spectrum(&spectrum, 2.0).unwrap();
    let target = LiftTarget::drained(vec![1.0 / 6.0f64.sqrt(); 6]);
    let filled = engineering::angles_from_coefficients(&schedule, &target).unwrap();
    c.bench_function("simulate_lift_6level", |b| {
        b.iter(|| engineering::simulate_lift(black_box(&filled), 1.7).unwrap())
    });
}

fn bench_ion_pipeline(c: &mut Criterion) {
    let spectrum = Spectrum::equally_gapped(4);
    let state = ProbeState::flat(4);
    let schedule = ioncompile::compile_protocol(&spectrum, &state, 2.0, 5).unwrap();
    c.bench_function("simulate_ion_4level", |b| {
        b.iter(|| {
            ioncompile::simulate_ion(
                black_box(&schedule.pulses),
                0.7,
                2.0,
                &IonState::ground(5),
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_personick,
    bench_grid_pair,
    bench_state_optimization,
    bench_lift_simulation,
    bench_ion_pipeline
);
criterion_main!(benches);
