use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use recur_core::diagram::{count_paths, irreducible_component};
use recur_core::moran::{build_for_model, construct_point, seed_prefix};
use recur_core::recurrence::{first_return, trace};
use recur_core::schedule::make_schedule;
use recur_core::{AlphaBeta, Ext, MarkovDiagram, SubshiftModel, Word};

fn returns(c: &mut Criterion) {
    let cfg = build_for_model(&SubshiftModel::full(2).unwrap(), 9, 6, 10_000_000).unwrap();
    let x = seed_prefix(&cfg, 1, 100_000).unwrap();
    c.bench_function("first_return n=20 len=1e5", |b| b.iter(|| first_return(black_box(&x), 20).unwrap()));
    c.bench_function("trace nmax=40 len=1e5", |b| b.iter(|| trace(black_box(&x), 40).unwrap()));
}

fn diagrams(c: &mut Criterion) {
    let model = SubshiftModel::interval(AlphaBeta::parse("0.5", "2.5").unwrap());
    c.bench_function("diagram (0.5, 2.5) N=10", |b| b.iter(|| MarkovDiagram::build(black_box(&model), 10).unwrap()));
    let golden = SubshiftModel::sft(2, vec![Word::parse(2, "11").unwrap()]).unwrap();
    let d = MarkovDiagram::build(&golden, 12).unwrap();
    let dec = irreducible_component(&d).unwrap();
    c.bench_function("count_paths golden n=60", |b| b.iter(|| count_paths(&d, &dec, black_box(60)).unwrap()));
}

fn moran(c: &mut Criterion) {
    c.bench_function("make_schedule P=1000", |b| {
        b.iter(|| make_schedule(Ext::Finite(0.6), Ext::Finite(1.0), black_box(1000)).unwrap())
    });
    let cfg = build_for_model(&SubshiftModel::full(2).unwrap(), 9, 6, 10_000_000).unwrap();
    let s = make_schedule(Ext::Finite(0.6), Ext::Finite(1.0), 200).unwrap().shift_indices(9, 0).unwrap();
    let mut g = c.benchmark_group("moran");
    g.sample_size(10);
    g.bench_function("construct_point 1e5", |b| b.iter(|| construct_point(&cfg, &s, black_box(100_000), 7).unwrap()));
    g.finish();
}

criterion_group!(benches, returns, diagrams, moran);
criterion_main!(benches);
