use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use purposegraph_core::extractor::{build_call_graph, index, reachable_data_all};
use purposegraph_core::lpl::{parse_policy, serialize_policy, StrengthRegistry};
use purposegraph_core::minisvc::parse_source;
use purposegraph_core::synth::{self, CorpusSpec};
use purposegraph_core::validator::validate;

fn bench_parse(c: &mut Criterion) {
    let files = synth::corpus(&CorpusSpec {
        controllers: 30,
        endpoints: 245,
        entities: 19,
        helpers: 25,
        interfaces: 3,
        endpoint_cap: 0,
        seed: 2024,
    });
    c.bench_function("parse 77-class corpus", |b| {
        b.iter(|| {
            files
                .iter()
                .map(|(path, src)| parse_source(src, path).unwrap())
                .count()
        })
    });
}

fn bench_reachability(c: &mut Criterion) {
    let files = synth::corpus(&CorpusSpec {
        controllers: 30,
        endpoints: 245,
        entities: 19,
        helpers: 25,
        interfaces: 3,
        endpoint_cap: 0,
        seed: 2024,
    });
    let units: Vec<_> = files.iter().map(|(p, s)| parse_source(s, p).unwrap()).collect();
    let table = index(&units).unwrap();
    let graph = build_call_graph(&table);
    c.bench_function("reachability over 245 endpoints", |b| {
        b.iter(|| reachable_data_all(&graph, &table))
    });
}

fn bench_validate(c: &mut Criterion) {
    let registry = StrengthRegistry::default();
    let policies: Vec<_> = (0..50).map(synth::policy).collect();
    c.bench_function("validate 50 policies", |b| {
        b.iter(|| policies.iter().map(|p| validate(p, &registry, false).is_valid).count())
    });
}

fn bench_round_trip(c: &mut Criterion) {
    let policy = synth::policy(7);
    let text = serialize_policy(&policy);
    c.bench_function("policy json round-trip", |b| {
        b.iter_batched(
            || text.clone(),
            |t| serialize_policy(&parse_policy(&t, false).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_parse, bench_reachability, bench_validate, bench_round_trip);
criterion_main!(benches);
