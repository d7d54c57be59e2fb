use conceptvec::corpus::StreamKind;
use conceptvec::synth::{cluster_corpus, ClusterSpec};
use conceptvec::train::{encode_corpus, Model, TrainConfig, Trainer};
use conceptvec::vocab::{build_vocabulary, KindFilter, MinCount};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn epoch_throughput(c: &mut Criterion) {
    let spec = ClusterSpec {
        documents: 500,
        ..Default::default()
    };
    let docs = cluster_corpus(&spec);
    let mut group = c.benchmark_group("train_epoch");
    group.sample_size(10);
    for (model, kind) in [
        (Model::Crc, StreamKind::Crc),
        (Model::ThreeC, StreamKind::ThreeC),
    ] {
        let streams: Vec<_> = docs.iter().map(|d| kind.stream(d)).collect();
        let vocab = build_vocabulary(
            streams.iter().map(Vec::as_slice),
            MinCount::uniform(1),
            KindFilter::All,
        )
        .unwrap();
        let corpus = encode_corpus(&streams, &vocab);
        let tokens: usize = corpus.iter().map(Vec::len).sum();
        for workers in [1usize, 4] {
            let cfg = TrainConfig {
                dim: 100,
                window: 5,
                epochs: 1,
                workers,
                model,
                ..Default::default()
            };
            let pairs = conceptvec::train::corpus_pair_count(&corpus, cfg.window);
            group.throughput(Throughput::Elements(tokens as u64));
            group.bench_function(BenchmarkId::new(format!("{model}"), workers), |b| {
                b.iter(|| {
                    let mut trainer = Trainer::<f32>::new(&vocab, &cfg, pairs).unwrap();
                    trainer.run_epoch(&corpus).unwrap()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, epoch_throughput);
criterion_main!(benches);
