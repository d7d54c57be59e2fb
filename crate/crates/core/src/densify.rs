//! Dense representations of BOC vectors.
//!
//! [`densify`] replaces a sparse BOC by the weight-normalized average of its
//! concepts' embeddings. It touches each non-zero entry once, so comparing
//! two BOC vectors costs one pass per vector plus a dense cosine.
//!
//! The alignment baselines ([`sim_many_to_many`], [`sim_max_align`],
//! [`sim_hungarian`]) instead compare two sparse vectors through pairwise
//! concept similarities, ignoring pairs below a threshold. Their exact
//! weighting is a reconstruction: each score is a sum of weight products
//! times concept similarity over a normalizer, and the best-match and
//! one-to-one variants reduce to the exact-match cosine when concept
//! similarity is the identity indicator.

use std::cell::Cell;

use rayon::prelude::*;

use crate::assignment::{max_weight_assignment, Assignment};
use crate::boc::SparseBoc;
use crate::embeddings::{EmbeddingStore, Real};
use crate::error::{Error, Result};

/// Source of concept embedding rows.
pub trait RowSource<F> {
    fn dim(&self) -> usize;
    fn concept_row(&self, concept_id: &str) -> Option<&[F]>;
}

impl<F: Real> RowSource<F> for EmbeddingStore<F> {
    fn dim(&self) -> usize {
        EmbeddingStore::dim(self)
    }

    fn concept_row(&self, concept_id: &str) -> Option<&[F]> {
        self.concept_embedding(concept_id)
    }
}

/// Wraps a [`RowSource`] and counts the rows handed out.
pub struct CountingRows<'a, S> {
    inner: &'a S,
    reads: Cell<usize>,
}

impl<'a, S> CountingRows<'a, S> {
    pub fn new(inner: &'a S) -> Self {
        CountingRows {
            inner,
            reads: Cell::new(0),
        }
    }

    pub fn reads(&self) -> usize {
        self.reads.get()
    }
}

impl<F, S: RowSource<F>> RowSource<F> for CountingRows<'_, S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn concept_row(&self, concept_id: &str) -> Option<&[F]> {
        let row = self.inner.concept_row(concept_id);
        if row.is_some() {
            self.reads.set(self.reads.get() + 1);
        }
        row
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector<F = f32> {
    components: Vec<F>,
}

impl<F: Real> DenseVector<F> {
    pub fn new(components: Vec<F>) -> Result<Self> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(
                "dense vector has non-finite components".into(),
            ));
        }
        Ok(DenseVector { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[F] {
        &self.components
    }

    pub fn into_components(self) -> Vec<F> {
        self.components
    }
}

/// Result of [`densify_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct Densified<F = f32> {
    pub vector: DenseVector<F>,
    /// Concepts absent from the embedding store.
    pub skipped: usize,
}

/// Weighted average of the embeddings of the BOC's concepts. Concepts
/// missing from the store are skipped and the weights renormalized.
pub fn densify<F: Real, S: RowSource<F> + ?Sized>(
    boc: &SparseBoc,
    rows: &S,
) -> Result<DenseVector<F>> {
    densify_report(boc, rows).map(|d| d.vector)
}

pub fn densify_report<F: Real, S: RowSource<F> + ?Sized>(
    boc: &SparseBoc,
    rows: &S,
) -> Result<Densified<F>> {
    if boc.is_empty() {
        return Err(Error::EmptyBoc);
    }
    let mut acc = vec![0f64; rows.dim()];
    let mut total = 0f64;
    let mut skipped = 0;
    for (concept, weight) in boc.entries() {
        match rows.concept_row(concept) {
            Some(row) => {
                for (a, &x) in acc.iter_mut().zip(row) {
                    *a += weight * x.to_f64().unwrap();
                }
                total += weight;
            }
            None => skipped += 1,
        }
    }
    if skipped == boc.len() {
        return Err(Error::NoEmbeddableConcepts { skipped });
    }
    let components = acc
        .into_iter()
        .map(|a| F::from_f64_lossy(a / total))
        .collect();
    Ok(Densified {
        vector: DenseVector { components },
        skipped,
    })
}

/// Densifies every record; a failing record does not stop the batch.
pub fn matrix_densify<F, S>(records: &[SparseBoc], rows: &S) -> Vec<Result<DenseVector<F>>>
where
    F: Real,
    S: RowSource<F> + Sync + ?Sized,
{
    records.par_iter().map(|boc| densify(boc, rows)).collect()
}

fn cosine_f64<F: Real>(a: &[F], b: &[F]) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0f64, 0f64, 0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x.to_f64().unwrap(), y.to_f64().unwrap());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        None
    } else {
        Some((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
    }
}

/// Cosine of two embedding rows, or an error if either is zero.
pub fn vector_cosine<F: Real>(a: &[F], b: &[F]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    cosine_f64(a, b).ok_or(Error::ZeroVector)
}

pub fn dense_cosine<F: Real>(a: &DenseVector<F>, b: &DenseVector<F>) -> Result<f64> {
    vector_cosine(&a.components, &b.components)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mechanism {
    ManyToMany,
    MaxAlign,
    Hungarian,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignmentConfig {
    /// Concept pairs less similar than this count as unrelated.
    pub threshold: f64,
    pub mechanism: Mechanism,
}

impl AlignmentConfig {
    pub fn new(threshold: f64, mechanism: Mechanism) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(format!(
                "threshold {threshold} outside [0, 1]"
            )));
        }
        Ok(AlignmentConfig {
            threshold,
            mechanism,
        })
    }

    pub fn similarity<F: Real, S: RowSource<F> + ?Sized>(
        &self,
        u: &SparseBoc,
        v: &SparseBoc,
        rows: &S,
    ) -> Result<f64> {
        match self.mechanism {
            Mechanism::ManyToMany => sim_many_to_many(u, v, rows, self),
            Mechanism::MaxAlign => sim_max_align(u, v, rows, self),
            Mechanism::Hungarian => sim_hungarian(u, v, rows, self),
        }
    }
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        AlignmentConfig {
            threshold: 0.85,
            mechanism: Mechanism::Hungarian,
        }
    }
}

/// Pairwise concept similarities between `u` (rows) and `v` (columns),
/// zeroed below `threshold`. Identical ids score 1; pairs involving a
/// concept without an embedding score 0.
pub fn concept_similarities<F: Real, S: RowSource<F> + ?Sized>(
    u: &SparseBoc,
    v: &SparseBoc,
    rows: &S,
    threshold: f64,
) -> Result<Vec<Vec<f64>>> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::EmptyBoc);
    }
    let lookup = |b: &SparseBoc| -> Result<Vec<Option<&[F]>>> {
        let found: Vec<_> = b
            .entries()
            .iter()
            .map(|(c, _)| rows.concept_row(c))
            .collect();
        if found.iter().all(Option::is_none) {
            return Err(Error::NoEmbeddableConcepts {
                skipped: found.len(),
            });
        }
        Ok(found)
    };
    let u_rows = lookup(u)?;
    let v_rows = lookup(v)?;
    Ok(u.entries()
        .iter()
        .zip(&u_rows)
        .map(|((cu, _), ru)| {
            v.entries()
                .iter()
                .zip(&v_rows)
                .map(|((cv, _), rv)| {
                    let sim = if cu == cv {
                        1.0
                    } else {
                        match (ru, rv) {
                            (Some(a), Some(b)) => cosine_f64(a, b).unwrap_or(0.0),
                            _ => 0.0,
                        }
                    };
                    if sim < threshold {
                        0.0
                    } else {
                        sim
                    }
                })
                .collect()
        })
        .collect())
}

fn weights(b: &SparseBoc) -> Vec<f64> {
    b.entries().iter().map(|(_, w)| *w).collect()
}

/// `Σ_i Σ_j u_i v_j sim_ij / (Σ u · Σ v)` over a thresholded similarity matrix.
pub fn many_to_many_score(u: &[f64], v: &[f64], sims: &[Vec<f64>]) -> f64 {
    let num: f64 = u
        .iter()
        .zip(sims)
        .map(|(ui, row)| ui * v.iter().zip(row).map(|(vj, s)| vj * s).sum::<f64>())
        .sum();
    num / (u.iter().sum::<f64>() * v.iter().sum::<f64>())
}

/// Best-match alignment: each `u` concept takes its most similar `v`
/// concept (first one on ties).
pub fn max_align_score(u: &[f64], v: &[f64], sims: &[Vec<f64>]) -> f64 {
    let num: f64 = u
        .iter()
        .zip(sims)
        .map(|(ui, row)| {
            let (best, sim) =
                row.iter()
                    .enumerate()
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |acc, (j, &s)| if s > acc.1 { (j, s) } else { acc },
                    );
            ui * v[best] * sim
        })
        .sum();
    num / (norm(u) * norm(v))
}

/// One-to-one alignment maximizing the total similarity.
pub fn hungarian_score(u: &[f64], v: &[f64], sims: &[Vec<f64>]) -> (f64, Assignment) {
    let assignment = max_weight_assignment(sims);
    let num: f64 = assignment
        .pairs
        .iter()
        .map(|&(i, j)| u[i] * v[j] * sims[i][j])
        .sum();
    (num / (norm(u) * norm(v)), assignment)
}

fn norm(w: &[f64]) -> f64 {
    w.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sim_many_to_many<F: Real, S: RowSource<F> + ?Sized>(
    u: &SparseBoc,
    v: &SparseBoc,
    rows: &S,
    cfg: &AlignmentConfig,
) -> Result<f64> {
    let sims = concept_similarities(u, v, rows, cfg.threshold)?;
    Ok(many_to_many_score(&weights(u), &weights(v), &sims))
}

pub fn sim_max_align<F: Real, S: RowSource<F> + ?Sized>(
    u: &SparseBoc,
    v: &SparseBoc,
    rows: &S,
    cfg: &AlignmentConfig,
) -> Result<f64> {
    let sims = concept_similarities(u, v, rows, cfg.threshold)?;
    Ok(max_align_score(&weights(u), &weights(v), &sims))
}

pub fn sim_hungarian<F: Real, S: RowSource<F> + ?Sized>(
    u: &SparseBoc,
    v: &SparseBoc,
    rows: &S,
    cfg: &AlignmentConfig,
) -> Result<f64> {
    hungarian_alignment(u, v, rows, cfg).map(|(score, _)| score)
}

/// Like [`sim_hungarian`], also returning the matching.
pub fn hungarian_alignment<F: Real, S: RowSource<F> + ?Sized>(
    u: &SparseBoc,
    v: &SparseBoc,
    rows: &S,
    cfg: &AlignmentConfig,
) -> Result<(f64, Assignment)> {
    let sims = concept_similarities(u, v, rows, cfg.threshold)?;
    Ok(hungarian_score(&weights(u), &weights(v), &sims))
}
