use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use fuzzyc_bench::setup;
use fuzzyc_core::fol::Connective;
use fuzzyc_core::grounding::{
    emit_loss, evaluate_constraint, ground, EmitContext, GroundingMode, DEFAULT_ROW_CAP,
};
use fuzzyc_core::loss::LossMapping;
use fuzzyc_core::scenarios::faces;
use fuzzyc_core::semantics::{eval_connective, TNorm};
use std::hint::black_box;

fn bench_connectives(c: &mut Criterion) {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    c.bench_function("connective_grid_product", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for &x in &grid {
                for &y in &grid {
                    for op in [
                        Connective::And,
                        Connective::Or,
                        Connective::Implies,
                        Connective::Iff,
                    ] {
                        acc += eval_connective(op, &[x, y], TNorm::Product).unwrap();
                    }
                }
            }
            black_box(acc)
        })
    });
}

fn bench_parse_faces(c: &mut Criterion) {
    c.bench_function("parse_and_compile_faces", |b| {
        b.iter(|| black_box(faces::compile_faces(TNorm::Product).unwrap()))
    });
}

fn bench_evaluate(c: &mut Criterion) {
    let s = setup(300);
    let table = ground(
        &s.supervision,
        &s.domains,
        GroundingMode::Exhaustive,
        DEFAULT_ROW_CAP,
    )
    .unwrap();
    c.bench_function("evaluate_supervision_300", |b| {
        b.iter(|| {
            let (node, graph) =
                evaluate_constraint(&s.supervision, &table, &s.domains, &s.bindings).unwrap();
            black_box(graph.scalar_value(node))
        })
    });

    let batch = ground(
        &s.cycle,
        &s.domains,
        GroundingMode::Minibatch { size: 64, seed: 5 },
        DEFAULT_ROW_CAP,
    )
    .unwrap();
    c.bench_function("cycle_loss_backward_batch64", |b| {
        b.iter_batched(
            || (),
            |()| {
                let mut graph = fuzzyc_core::autodiff::Graph::new();
                let mut ctx = EmitContext::new();
                let emitted = emit_loss(
                    &mut graph,
                    &mut ctx,
                    &s.cycle,
                    &batch,
                    &s.domains,
                    &s.bindings,
                    LossMapping::NegLog,
                )
                .unwrap();
                graph.backward(emitted.loss).unwrap();
                black_box(graph.param_grads().len())
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_connectives,
    bench_parse_faces,
    bench_evaluate
);
criterion_main!(benches);
