//! Throughput of the samplers and the embedder on N-queens instances.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qanneal_core::{
    chimera, exact_solve, find_embedding, nqueens_qubo, Graph, HardwareRange, NoiseModel, NoisyBoltzmann,
    SamplerParams, SimulatedAnnealing,
};

fn exact(c: &mut Criterion) {
    let q = nqueens_qubo(4).unwrap();
    c.bench_function("exact_nqueens4", |b| {
        b.iter(|| exact_solve(black_box(&q)).unwrap())
    });
}

fn anneal(c: &mut Criterion) {
    let q = nqueens_qubo(6).unwrap();
    let sampler = SimulatedAnnealing::new(SamplerParams::default().with_reads(100).with_sweeps(100));
    c.bench_function("sa_nqueens6_100x100", |b| {
        b.iter(|| sampler.sample(black_box(&q)).unwrap())
    });
}

fn boltzmann(c: &mut Criterion) {
    let q = nqueens_qubo(4).unwrap();
    let sampler = NoisyBoltzmann::new(
        SamplerParams::default().with_reads(1000),
        NoiseModel::default(),
        HardwareRange::default(),
    );
    c.bench_function("boltzmann_nqueens4_1000", |b| {
        b.iter(|| sampler.sample(black_box(&q)).unwrap())
    });
}

fn embed(c: &mut Criterion) {
    let g = Graph::from_model(&nqueens_qubo(4).unwrap());
    let hw = chimera(8, 8, 4).unwrap();
    c.bench_function("embed_nqueens4_chimera8", |b| {
        b.iter(|| find_embedding(black_box(&g), &hw, 0).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = exact, anneal, boltzmann, embed
}
criterion_main!(benches);
