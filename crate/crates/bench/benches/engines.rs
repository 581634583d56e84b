use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hxpath_bench::formulas;
use hxpath_core::frames::decide_with_frame;
use hxpath_core::oracle::{bounded_sat, Bound};
use hxpath_core::pspace;
use hxpath_core::semantics::FrameClass;
use hxpath_core::tableau::saturate;

fn engines(c: &mut Criterion) {
    let mut group = c.benchmark_group("engines");
    for (name, phi) in formulas() {
        group.bench_function(format!("naive/{name}"), |b| b.iter(|| saturate(black_box(&phi)).is_sat()));
        group.bench_function(format!("pspace/{name}"), |b| b.iter(|| pspace::sat(black_box(&phi)).0));
    }
    group.finish();
}

fn frames(c: &mut Criterion) {
    let mut group = c.benchmark_group("frames");
    for (name, phi) in formulas() {
        for frame in [FrameClass::Forest, FrameClass::Tree] {
            group.bench_function(format!("{frame}/{name}"), |b| {
                b.iter(|| decide_with_frame(black_box(&phi), frame).is_sat())
            });
        }
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for (name, phi) in formulas().into_iter().filter(|(n, _)| matches!(*n, "prop" | "sec5")) {
        group.bench_function(format!("bound3/{name}"), |b| b.iter(|| bounded_sat(black_box(&phi), Bound::nodes(3))));
    }
    group.finish();
}

criterion_group!(benches, engines, frames, oracle);
criterion_main!(benches);
