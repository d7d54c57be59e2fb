//! Skip-gram training with negative sampling.
//!
//! Several workers update the shared parameter matrices without any locking
//! (Hogwild-style). Updates may occasionally be lost; only single-worker
//! runs are reproducible.

use std::marker::PhantomData;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use super::config::{LearningRate, TrainConfig};
use super::contexts::pair_count;
use super::objective::{dot, log_sigmoid, sigmoid};
use crate::corpus::TokenStream;
use crate::embeddings::{EmbeddingStore, Matrix, Real};
use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

/// Raw view of the two parameter matrices shared between workers.
struct SharedParams<F> {
    input: *mut F,
    output: *mut F,
    dim: usize,
    rows: usize,
    _marker: PhantomData<F>,
}

// Workers write rows concurrently without synchronization; see module docs.
unsafe impl<F: Send> Send for SharedParams<F> {}
unsafe impl<F: Send> Sync for SharedParams<F> {}

impl<F> SharedParams<F> {
    fn new(input: &mut Matrix<F>, output: &mut Matrix<F>) -> Self
    where
        F: Real,
    {
        SharedParams {
            dim: input.cols(),
            rows: input.rows(),
            input: input.as_mut_slice().as_mut_ptr(),
            output: output.as_mut_slice().as_mut_ptr(),
            _marker: PhantomData,
        }
    }

    /// # Safety
    /// `row < rows`, and the returned slice must not outlive the matrices.
    #[allow(clippy::mut_from_ref)]
    unsafe fn input_row(&self, row: usize) -> &mut [F] {
        debug_assert!(row < self.rows);
        std::slice::from_raw_parts_mut(self.input.add(row * self.dim), self.dim)
    }

    /// # Safety
    /// Same as [`SharedParams::input_row`].
    #[allow(clippy::mut_from_ref)]
    unsafe fn output_row(&self, row: usize) -> &mut [F] {
        debug_assert!(row < self.rows);
        std::slice::from_raw_parts_mut(self.output.add(row * self.dim), self.dim)
    }
}

/// Per-worker scratch space.
struct Scratch<F> {
    grad_u: Vec<F>,
    coefs: Vec<F>,
    samples: Vec<u32>,
}

impl<F: Real> Scratch<F> {
    fn new(dim: usize, negatives: usize) -> Self {
        Scratch {
            grad_u: vec![F::zero(); dim],
            coefs: Vec::with_capacity(negatives + 1),
            samples: Vec::with_capacity(negatives + 1),
        }
    }
}

/// One gradient-ascent step on a pair. `scratch.samples` holds the context
/// followed by the negatives. All coefficients are computed from the
/// parameters before any row is written, so the step follows the exact
/// gradient even when a sample id repeats. Returns the objective value.
///
/// # Safety
/// All ids must be valid rows of `params`.
unsafe fn sgd_step<F: Real>(
    params: &SharedParams<F>,
    target: u32,
    lr: F,
    scratch: &mut Scratch<F>,
) -> F {
    let u = params.input_row(target as usize);
    scratch.coefs.clear();
    let mut objective = F::zero();
    for (slot, &id) in scratch.samples.iter().enumerate() {
        let score = dot(params.output_row(id as usize), u);
        let coef = if slot == 0 {
            objective = objective + log_sigmoid(score);
            F::one() - sigmoid(score)
        } else {
            objective = objective + log_sigmoid(-score);
            -sigmoid(score)
        };
        scratch.coefs.push(coef);
    }

    scratch.grad_u.iter_mut().for_each(|g| *g = F::zero());
    for (&id, &coef) in scratch.samples.iter().zip(&scratch.coefs) {
        let v = params.output_row(id as usize);
        for (g, &x) in scratch.grad_u.iter_mut().zip(v.iter()) {
            *g = *g + coef * x;
        }
    }
    for (&id, &coef) in scratch.samples.iter().zip(&scratch.coefs) {
        let v = params.output_row(id as usize);
        let step = lr * coef;
        for (x, &ui) in v.iter_mut().zip(u.iter()) {
            *x = *x + step * ui;
        }
    }
    for (ui, &g) in u.iter_mut().zip(&scratch.grad_u) {
        *ui = *ui + lr * g;
    }
    objective
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EpochStats {
    pub epoch: usize,
    pub tokens: u64,
    pub pairs: u64,
    /// Mean objective over the pairs processed in the epoch.
    pub mean_objective: f64,
    pub learning_rate: f64,
    pub elapsed: Duration,
}

impl EpochStats {
    pub fn tokens_per_sec(&self) -> f64 {
        self.tokens as f64 / self.elapsed.as_secs_f64().max(1e-9)
    }
}

/// Encodes token streams onto vocabulary ids, dropping unknown tokens and
/// streams that end up empty.
pub fn encode_corpus(streams: &[TokenStream], vocab: &Vocabulary) -> Vec<Vec<u32>> {
    streams
        .iter()
        .map(|s| vocab.encode(s))
        .filter(|ids| !ids.is_empty())
        .collect()
}

/// Stateful trainer; one call to [`Trainer::run_epoch`] per pass.
pub struct Trainer<F: Real = f32> {
    cfg: TrainConfig,
    store: EmbeddingStore<F>,
    noise: WeightedAliasIndex<f64>,
    keep_prob: Option<Vec<f64>>,
    schedule: LearningRate,
    processed: u64,
    epochs_done: usize,
}

impl<F: Real> Trainer<F> {
    /// Initializes parameters: input rows uniform in ±0.5/dim, output rows zero.
    /// `pairs_per_epoch` sizes the learning-rate schedule.
    pub fn new(vocab: &Vocabulary, cfg: &TrainConfig, pairs_per_epoch: u64) -> Result<Self> {
        cfg.validate()?;
        if pairs_per_epoch == 0 {
            return Err(Error::NothingToTrain);
        }
        let rows = vocab.len();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let bound = 0.5 / cfg.dim as f64;
        let init: Vec<F> = (0..rows * cfg.dim)
            .map(|_| F::from_f64_lossy(rng.random_range(-bound..=bound)))
            .collect();
        let input = Matrix::from_vec(rows, cfg.dim, init)?;
        let output = Matrix::zeros(rows, cfg.dim);
        let keys = vocab.keys().map(str::to_owned).collect();
        let store = EmbeddingStore::new(keys, input, Some(output))?;

        let noise = WeightedAliasIndex::new(vocab.noise().to_vec())
            .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;

        let keep_prob = cfg.subsample.map(|t| {
            let total: u64 = vocab.entries().iter().map(|e| e.count).sum();
            vocab
                .entries()
                .iter()
                .map(|e| {
                    let f = e.count as f64 / total as f64;
                    ((t / f).sqrt() + t / f).min(1.0)
                })
                .collect()
        });

        Ok(Trainer {
            schedule: LearningRate {
                initial: cfg.initial_lr,
                min: cfg.min_lr,
                total: pairs_per_epoch.saturating_mul(cfg.epochs as u64),
            },
            cfg: cfg.clone(),
            store,
            noise,
            keep_prob,
            processed: 0,
            epochs_done: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn store(&self) -> &EmbeddingStore<F> {
        &self.store
    }

    pub fn into_store(self) -> EmbeddingStore<F> {
        self.store
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    /// Pairs processed so far, over all epochs.
    pub fn processed_pairs(&self) -> u64 {
        self.processed
    }

    pub fn learning_rate(&self) -> f64 {
        self.schedule.at(self.processed)
    }

    /// Runs one pass over `corpus` (id-encoded streams) and checks that all
    /// parameters are still finite.
    pub fn run_epoch(&mut self, corpus: &[Vec<u32>]) -> Result<EpochStats> {
        let start = Instant::now();
        let epoch = self.epochs_done;
        let workers = self.cfg.workers.min(corpus.len()).max(1);
        let rows = self.store.len();
        if let Some(bad) = corpus.iter().flatten().find(|&&id| id as usize >= rows) {
            return Err(Error::VocabularyMismatch(format!(
                "token id {bad} out of range"
            )));
        }

        let (input, output) = self
            .store
            .parameters_mut()
            .expect("trainer store has an output matrix");
        let params = SharedParams::new(input, output);
        let progress = AtomicU64::new(self.processed);

        let totals: Vec<(u64, u64, f64)> = if workers == 1 {
            vec![self.worker(&params, corpus, 0, 1, epoch, &progress)]
        } else {
            let this = &*self;
            let params = &params;
            let progress = &progress;
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..workers)
                    .map(|w| {
                        scope
                            .spawn(move || this.worker(params, corpus, w, workers, epoch, progress))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            })
        };

        let (tokens, pairs, objective) = totals.into_iter().fold((0, 0, 0.0), |acc, t| {
            (acc.0 + t.0, acc.1 + t.1, acc.2 + t.2)
        });
        self.processed += pairs;
        self.epochs_done += 1;
        self.check_finite(epoch + 1)?;

        let stats = EpochStats {
            epoch: epoch + 1,
            tokens,
            pairs,
            mean_objective: if pairs > 0 {
                objective / pairs as f64
            } else {
                0.0
            },
            learning_rate: self.learning_rate(),
            elapsed: start.elapsed(),
        };
        log::info!(
            "epoch {}/{}: {} pairs, mean objective {:.5}, lr {:.6}, {:.0} tokens/s",
            stats.epoch,
            self.cfg.epochs,
            stats.pairs,
            stats.mean_objective,
            stats.learning_rate,
            stats.tokens_per_sec()
        );
        Ok(stats)
    }

    /// Processes streams `worker, worker + workers, ...`. Returns (tokens,
    /// pairs, summed objective).
    fn worker(
        &self,
        params: &SharedParams<F>,
        corpus: &[Vec<u32>],
        worker: usize,
        workers: usize,
        epoch: usize,
        progress: &AtomicU64,
    ) -> (u64, u64, f64) {
        const SYNC_EVERY: u64 = 1024;

        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(1 + (epoch * workers + worker) as u64);
        let mut scratch = Scratch::new(self.cfg.dim, self.cfg.negatives);
        let mut kept = Vec::new();
        let window = self.cfg.window;

        let mut processed = progress.load(Ordering::Relaxed);
        let mut unsynced = 0u64;
        let (mut tokens, mut pairs, mut objective) = (0u64, 0u64, 0.0f64);

        for stream in corpus.iter().skip(worker).step_by(workers) {
            let ids: &[u32] = match &self.keep_prob {
                None => stream,
                Some(keep) => {
                    kept.clear();
                    kept.extend(
                        stream
                            .iter()
                            .copied()
                            .filter(|&id| rng.random::<f64>() < keep[id as usize]),
                    );
                    &kept
                }
            };
            tokens += ids.len() as u64;
            for i in 0..ids.len() {
                let lo = i.saturating_sub(window);
                let hi = (i + window).min(ids.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let lr = F::from_f64_lossy(self.schedule.at(processed));
                    scratch.samples.clear();
                    scratch.samples.push(ids[j]);
                    for _ in 0..self.cfg.negatives {
                        scratch.samples.push(self.noise.sample(&mut rng) as u32);
                    }
                    // SAFETY: ids were range-checked in run_epoch and noise
                    // samples index the vocabulary.
                    let value = unsafe { sgd_step(params, ids[i], lr, &mut scratch) };
                    objective += value.to_f64().unwrap_or(f64::NAN);
                    pairs += 1;
                    if workers == 1 {
                        processed += 1;
                    } else {
                        unsynced += 1;
                        processed += 1;
                        if unsynced == SYNC_EVERY {
                            processed = progress.fetch_add(unsynced, Ordering::Relaxed) + unsynced;
                            unsynced = 0;
                        }
                    }
                }
            }
        }
        progress.fetch_add(unsynced, Ordering::Relaxed);
        (tokens, pairs, objective)
    }

    fn check_finite(&self, epoch: usize) -> Result<()> {
        if let Some(row) = self.store.input().first_non_finite_row() {
            return Err(Error::NonFinite {
                epoch,
                matrix: "input",
                row,
            });
        }
        if let Some(row) = self.store.output().and_then(Matrix::first_non_finite_row) {
            return Err(Error::NonFinite {
                epoch,
                matrix: "output",
                row,
            });
        }
        Ok(())
    }
}

/// Total pairs one epoch over `corpus` yields without subsampling.
pub fn corpus_pair_count(corpus: &[Vec<u32>], window: usize) -> u64 {
    corpus.iter().map(|ids| pair_count(ids.len(), window)).sum()
}

/// Trains on id-encoded streams for `cfg.epochs` passes.
pub fn train_encoded<F: Real>(
    corpus: &[Vec<u32>],
    vocab: &Vocabulary,
    cfg: &TrainConfig,
) -> Result<EmbeddingStore<F>> {
    cfg.validate()?;
    let pairs = corpus_pair_count(corpus, cfg.window);
    if pairs == 0 {
        return Err(Error::NothingToTrain);
    }
    let mut trainer = Trainer::new(vocab, cfg, pairs)?;
    for _ in 0..cfg.epochs {
        trainer.run_epoch(corpus)?;
    }
    Ok(trainer.into_store())
}

/// Trains on token streams; tokens missing from `vocab` are dropped.
pub fn train<F: Real>(
    streams: &[TokenStream],
    vocab: &Vocabulary,
    cfg: &TrainConfig,
) -> Result<EmbeddingStore<F>> {
    let corpus = encode_corpus(streams, vocab);
    train_encoded(&corpus, vocab, cfg)
}
