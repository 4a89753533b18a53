use std::hint::black_box;

use couette_bench::airy_points;
use couette_core::airy::{a0, ai};
use couette_core::evans::evans_det;
use couette_core::resolvent::{boundary_matrix, LangerMap, QuadParams};
use couette_core::C64;
use criterion::{criterion_group, criterion_main, Criterion};

fn airy(c: &mut Criterion) {
    let pts = airy_points();
    c.bench_function("ai/8-points", |b| b.iter(|| pts.iter().map(|&z| ai(black_box(z)).unwrap().ai).sum::<C64>()));
    c.bench_function("a0/8-points", |b| b.iter(|| pts.iter().map(|&z| a0(black_box(z)).unwrap().value.ln_abs()).sum::<f64>()));
}

fn evans(c: &mut Criterion) {
    let p = QuadParams::default();
    let mut g = c.benchmark_group("evans");
    for nu in [1e-3f64, 1e-5] {
        let c_pt = C64::new(0.3, -nu - 0.05 * nu.cbrt());
        g.bench_function(format!("det/nu={nu:e}"), |b| b.iter(|| evans_det(1.0, nu, black_box(c_pt), &p).unwrap().ln_ratio()));
        let map = LangerMap::new(1.0, nu, c_pt).unwrap();
        g.bench_function(format!("boundary_matrix/nu={nu:e}"), |b| b.iter(|| boundary_matrix(black_box(&map), &p)));
    }
    g.finish();
}

criterion_group!(benches, airy, evans);
criterion_main!(benches);
