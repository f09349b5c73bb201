use std::f64::consts::LN_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use psdyn_core::graph::{logscale_from_cone, metric_from_logscale, Budget};
use psdyn_core::growth::entropy_estimate;
use psdyn_core::rational::{branch_derivative_ratios, julia_dimension, level_cone, RationalMapSystem, DERIVATIVE};
use psdyn_core::sft::{word_cone, SftSystem, SymbolicCone, LEVEL};

fn subshift(c: &mut Criterion) {
    let sft = SftSystem::new(vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]).unwrap();
    let cone = SymbolicCone::new(sft, 18);
    c.bench_function("entropy_bracket_3x3_depth18", |b| {
        b.iter(|| entropy_estimate(black_box(&cone), LEVEL, Some(18)).unwrap())
    });

    let words = word_cone(&SftSystem::golden_mean(), 7, &[]).unwrap();
    let leaves: Vec<usize> = words.level(7).collect();
    let table = logscale_from_cone(&words, LEVEL, &leaves).unwrap();
    c.bench_function("metric_synthesis_golden_depth7", |b| {
        b.iter(|| metric_from_logscale(black_box(&table), 0.7).unwrap())
    });
}

fn rational(c: &mut Criterion) {
    let sys = RationalMapSystem::quadratic(0.2).unwrap();
    c.bench_function("level_cone_depth12", |b| b.iter(|| level_cone(black_box(&sys), 12).unwrap()));

    let budget = Budget {
        cocycle: DERIVATIVE,
        limit: 10.0 * LN_2,
    };
    let mut group = c.benchmark_group("slow");
    group.sample_size(10);
    group.bench_function("julia_dimension_depth10", |b| {
        b.iter(|| julia_dimension(black_box(&sys), budget, 1e-6).unwrap())
    });
    let atoms = level_cone(&sys, 14).unwrap();
    group.bench_function("branch_ratios_depth4", |b| {
        b.iter(|| branch_derivative_ratios(black_box(&sys), &atoms, 1.0325, 0.1, 4).unwrap())
    });
    group.finish();
}

criterion_group!(benches, subshift, rational);
criterion_main!(benches);
