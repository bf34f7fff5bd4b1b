//! Parallel vs sequential throughput on the hot batch paths: candidate
//! evaluation and space-membership sweeps.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mhnas::fixtures::{fixture_cost_models, medium_space};
use mhnas::genome::{sample, Genome};
use mhnas::metrics::NormFactors;
use mhnas::oracle::AccuracyOracle;
use mhnas::par::{map_ordered, map_ordered_seq};
use mhnas::profile::validate;
use mhnas::search::Evaluator;
use mhnas::metrics::RewardSpec;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn batch(n: usize) -> (mhnas::space::SearchSpace, Vec<Genome>) {
    let space = medium_space();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let genomes = (0..n).map(|_| sample(&space.decisions, &mut rng)).collect();
    (space, genomes)
}

fn bench_batch_evaluation(c: &mut Criterion) {
    let (space, genomes) = batch(2000);
    let oracle = AccuracyOracle::synthetic_default();
    let models = fixture_cost_models();
    let reference = space.compile(&genomes[0]).unwrap();
    let norm = NormFactors::from_reference(&reference, &models, "fixture").unwrap();
    let reward = RewardSpec::avg(-0.07);
    let evaluator = Evaluator::new(&space, &oracle, &models, Some(&norm), &reward).unwrap();

    let mut group = c.benchmark_group("batch_evaluation");
    group.bench_with_input(BenchmarkId::new("parallel", genomes.len()), &genomes, |b, gs| {
        b.iter(|| map_ordered(gs, |g| evaluator.evaluate(g).unwrap().reward));
    });
    group.bench_with_input(BenchmarkId::new("sequential", genomes.len()), &genomes, |b, gs| {
        b.iter(|| map_ordered_seq(gs, |g| evaluator.evaluate(g).unwrap().reward));
    });
    group.finish();
}

fn bench_membership_sweep(c: &mut Criterion) {
    let (space, genomes) = batch(2000);
    let graphs: Vec<_> = genomes.iter().map(|g| space.compile(g).unwrap()).collect();

    let mut group = c.benchmark_group("membership_sweep");
    group.bench_with_input(BenchmarkId::new("parallel", graphs.len()), &graphs, |b, gs| {
        b.iter(|| map_ordered(gs, |g| validate(g, &space.profiles).unwrap().ok));
    });
    group.bench_with_input(BenchmarkId::new("sequential", graphs.len()), &graphs, |b, gs| {
        b.iter(|| map_ordered_seq(gs, |g| validate(g, &space.profiles).unwrap().ok));
    });
    group.finish();
}

criterion_group!(benches, bench_batch_evaluation, bench_membership_sweep);
criterion_main!(benches);
