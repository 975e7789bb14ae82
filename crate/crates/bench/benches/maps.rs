use criterion::{criterion_group, criterion_main, Criterion};
use vpl_bench::{delta_model, grid, xfield_model};
use vpl_core::field_analysis::{evaluate_map, find_zeros, nodal_lines, Part, ZeroSearch};
use vpl_core::model::Component;

fn maps(c: &mut Criterion) {
    let mut group = c.benchmark_group("maps");
    group.sample_size(10);
    let delta = delta_model(3);
    let g = grid(&delta, 41, Component::Total);
    group.bench_function("delta l=3 total 41x41", |b| b.iter(|| evaluate_map(&g, &delta)));
    let xfield = xfield_model(1);
    let g = grid(&xfield, 21, Component::First);
    group.bench_function("xfield l=1 first 21x21", |b| b.iter(|| evaluate_map(&g, &xfield)));
    group.finish();
}

fn topology(c: &mut Criterion) {
    let model = delta_model(3);
    let map = evaluate_map(&grid(&model, 81, Component::Total), &model).expect("map evaluates");
    c.bench_function("nodal_lines 81x81", |b| b.iter(|| nodal_lines(&map, Part::Real)));
    let mut group = c.benchmark_group("zeros");
    group.sample_size(10);
    group.bench_function("find_zeros delta l=3 81x81", |b| b.iter(|| find_zeros(&map, &ZeroSearch::default())));
    group.finish();
}

criterion_group!(benches, maps, topology);
criterion_main!(benches);
