//! Fixtures shared by the benchmarks.

use conceptvec::boc::SparseBoc;
use conceptvec::embeddings::{EmbeddingStore, Matrix};
use conceptvec::vocab::concept_key;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn concept(i: usize) -> String {
    format!("c{i}")
}

/// `concepts` random concept embeddings of width `dim`.
pub fn random_store(concepts: usize, dim: usize, seed: u64) -> EmbeddingStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = (0..concepts).map(|i| concept_key(&concept(i))).collect();
    let data = (0..concepts * dim)
        .map(|_| rng.random_range(-1.0f32..1.0))
        .collect();
    EmbeddingStore::new(keys, Matrix::from_vec(concepts, dim, data).unwrap(), None).unwrap()
}

/// A BOC of `len` distinct concepts drawn from the first `concepts` ids.
pub fn random_boc(len: usize, concepts: usize, rng: &mut impl Rng) -> SparseBoc {
    let ids = rand::seq::index::sample(rng, concepts, len.min(concepts));
    SparseBoc::new(
        ids.into_iter()
            .map(|i| (concept(i), rng.random_range(0.01..10.0))),
    )
    .unwrap()
}
