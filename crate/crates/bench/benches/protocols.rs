use annostream_core::algebra::matvec::gen_matvec;
use annostream_core::{GenParams, PrimeField, ProtocolKind, Stream};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(kind: ProtocolKind, p: &GenParams) -> Stream {
    kind.generate(&mut ChaCha8Rng::seed_from_u64(1), p).expect("bench sizes are valid")
}

/// Verifier time for the linear-annotation protocols as the edge count grows.
fn linear(c: &mut Criterion) {
    let field = PrimeField::default();
    for name in ["dag", "matching", "bfs", "dfs", "mst"] {
        let kind: ProtocolKind = name.parse().unwrap();
        let mut group = c.benchmark_group(format!("verify/{name}"));
        for m in [1u64 << 8, 1 << 10, 1 << 12] {
            let s = instance(kind, &GenParams { n: m / 4, m: Some(m), ..GenParams::default() });
            let ann = kind.prove(field, &s).unwrap();
            group.throughput(Throughput::Elements(m));
            group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| b.iter(|| kind.run(field, 7, &s, &ann)));
        }
        group.finish();
    }
}

fn prover(c: &mut Criterion) {
    let field = PrimeField::default();
    let mut group = c.benchmark_group("prove");
    for name in ["matching", "shortest-path", "apsp", "diameter"] {
        let kind: ProtocolKind = name.parse().unwrap();
        let s = instance(kind, &GenParams { n: 16, ..GenParams::default() });
        group.bench_function(name, |b| b.iter(|| kind.prove(field, &s)));
    }
    group.finish();
}

/// Matrix-vector checks across column splits.
fn tradeoff(c: &mut Criterion) {
    let field = PrimeField::default();
    let kind = ProtocolKind::Matvec;
    let mut group = c.benchmark_group("matvec-1024");
    for alpha in ["0", "1/4", "1/2", "3/4"] {
        let s = gen_matvec(&mut ChaCha8Rng::seed_from_u64(2), 1024, 1024, 4, alpha);
        let ann = kind.prove(field, &s).unwrap();
        group.bench_with_input(BenchmarkId::new("verify", alpha), &alpha, |b, _| b.iter(|| kind.run(field, 7, &s, &ann)));
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = linear, prover, tradeoff
}
criterion_main!(benches);
