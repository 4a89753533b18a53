use std::hint::black_box;

use couette_bench::separated;
use couette_core::channel::{ChannelOperator, StepperState};
use couette_core::contour::{build_contour, ContourShape};
use couette_core::corrector::CorrectorRun;
use couette_core::data::Gaussian;
use couette_core::field::{ModeField, YGrid};
use couette_core::free::{evolve_free, LineField};
use couette_core::resolvent::QuadParams;
use criterion::{criterion_group, criterion_main, Criterion};

fn free(c: &mut Criterion) {
    let f = LineField::from_profile(&Gaussian { sigma: 1.0 }, 1.0, 90.0, 4097).unwrap();
    c.bench_function("free/evolve-4097", |b| b.iter(|| evolve_free(black_box(&f), 1e-3, 20.0).unwrap()));
}

fn channel(c: &mut Criterion) {
    let data = separated(1.0);
    let op = ChannelOperator::new(1.0, 1e-3, 128).unwrap();
    let stepper = op.stepper(op.default_dt()).unwrap();
    let init = ModeField::from_fn(1.0, op.grid.clone(), |y| couette_core::data::Profile::eval(&data, y));
    let state = StepperState { omega: init, t: 0.0, dt: op.default_dt() };
    c.bench_function("channel/step-n128", |b| b.iter(|| stepper.step(black_box(&state))));
}

fn corrector(c: &mut Criterion) {
    let data = separated(1.0);
    let (alpha, nu) = (1.0, 1e-2);
    let grid = YGrid::chebyshev(64);
    let mut g = c.benchmark_group("corrector");
    g.sample_size(10);
    g.bench_function("run-nu1e-2-n64", |b| {
        b.iter(|| {
            let k = build_contour(alpha, nu, ContourShape::steep(), 0.05, 1.0, 10.0).unwrap();
            let run = CorrectorRun::new(&data, alpha, nu, k, &grid.nodes, &QuadParams::default()).unwrap();
            run.omega_b(black_box(5.0)).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, free, channel, corrector);
criterion_main!(benches);
