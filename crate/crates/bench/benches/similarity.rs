use std::hint::black_box;

use conceptvec::boc::sparse_cosine;
use conceptvec::densify::{
    dense_cosine, densify, sim_hungarian, sim_many_to_many, sim_max_align, AlignmentConfig,
    DenseVector, Mechanism,
};
use conceptvec_bench::{random_boc, random_store};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CONCEPTS: usize = 5000;
const DIM: usize = 100;

fn densify_vs_alignment(c: &mut Criterion) {
    let store = random_store(CONCEPTS, DIM, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut group = c.benchmark_group("pair_similarity");
    for &n in &[10usize, 50, 100, 200] {
        let u = random_boc(n, CONCEPTS, &mut rng);
        let v = random_boc(n, CONCEPTS, &mut rng);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("sparse", n), &n, |b, _| {
            b.iter(|| sparse_cosine(black_box(&u), black_box(&v)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dense", n), &n, |b, _| {
            b.iter(|| {
                let du: DenseVector = densify(black_box(&u), &store).unwrap();
                let dv: DenseVector = densify(black_box(&v), &store).unwrap();
                dense_cosine(&du, &dv).unwrap()
            })
        });
        let cfg = |m| AlignmentConfig::new(0.85, m).unwrap();
        group.bench_with_input(BenchmarkId::new("many", n), &n, |b, _| {
            b.iter(|| {
                sim_many_to_many(
                    black_box(&u),
                    black_box(&v),
                    &store,
                    &cfg(Mechanism::ManyToMany),
                )
                .unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("max", n), &n, |b, _| {
            b.iter(|| {
                sim_max_align(
                    black_box(&u),
                    black_box(&v),
                    &store,
                    &cfg(Mechanism::MaxAlign),
                )
                .unwrap()
            })
        });
        if n <= 100 {
            group.bench_with_input(BenchmarkId::new("hungarian", n), &n, |b, _| {
                b.iter(|| {
                    sim_hungarian(
                        black_box(&u),
                        black_box(&v),
                        &store,
                        &cfg(Mechanism::Hungarian),
                    )
                    .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn densify_scaling(c: &mut Criterion) {
    let store = random_store(CONCEPTS, DIM, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut group = c.benchmark_group("densify");
    for &n in &[10usize, 100, 500, 1000] {
        let boc = random_boc(n, CONCEPTS, &mut rng);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &boc, |b, boc| {
            b.iter(|| densify::<f32, _>(black_box(boc), &store).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, densify_vs_alignment, densify_scaling);
criterion_main!(benches);
