//! Sequential versus data-parallel execution of the heavy kernels.
//!
//! Build without default features to measure the fallback path alone:
//! `cargo bench -p quaddel --no-default-features`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use quaddel::control::ControlGains;
use quaddel::dynamics::QuadParams;
use quaddel::flight::{fly_plan, FlightSettings};
use quaddel::generate::{random_instance, Shape};
use quaddel::instance::PdpInstance;
use quaddel::oracle::{brute_force_solve, default_max_legs};
use quaddel::par::Parallelism;
use quaddel::vision::{canny, fixtures, CannyParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

/// First feasible instance with three requests and two quadcopters.
fn busy_instance() -> (PdpInstance, quaddel::routes::RoutePlan) {
    let shape = Shape::default();
    (0u64..)
        .map(|s| random_instance(&mut ChaCha8Rng::seed_from_u64(s), &shape))
        .filter(|i| i.requests.len() == 3 && i.quadcopters.len() == 2)
        .find_map(|i| {
            let p = brute_force_solve(&i, default_max_legs(&i), Parallelism::Sequential).ok()?;
            Some((i, p))
        })
        .expect("generator yields a feasible two-quad instance")
}

fn oracle(c: &mut Criterion) {
    let (inst, _) = busy_instance();
    let mut group = c.benchmark_group("oracle");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| brute_force_solve(black_box(&inst), default_max_legs(&inst), mode))
        });
    }
    group.finish();
}

fn edges(c: &mut Criterion) {
    let mut group = c.benchmark_group("canny");
    for size in [64, 256] {
        let img = fixtures::noisy_square(size, size / 3, 20.0, 11);
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, size), &img, |b, img| {
                b.iter(|| canny(black_box(img), &CannyParams::default(), mode))
            });
        }
    }
    group.finish();
}

fn flight(c: &mut Criterion) {
    let (_, plan) = busy_instance();
    let params = QuadParams::default();
    let gains = ControlGains::default();
    let settings = FlightSettings {
        dt: 2e-3,
        ..FlightSettings::default()
    };
    let mut group = c.benchmark_group("fly_plan");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fly_plan(black_box(&plan), &params, &gains, &settings, mode))
        });
    }
    group.finish();
}

criterion_group!(benches, oracle, edges, flight);
criterion_main!(benches);
