//! Dataless classification: every instance goes to the label whose BOC is
//! most similar to its own, with no trained classifier.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::marker::PhantomData;
use std::str::FromStr;

use rayon::prelude::*;

use super::report::{EvalReport, ReportRow};
use crate::boc::{sparse_cosine, BocRecord, SparseBoc};
use crate::densify::{dense_cosine, densify, AlignmentConfig, DenseVector, Mechanism, RowSource};
use crate::embeddings::Real;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub id: String,
    pub boc: SparseBoc,
    pub gold: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatalessTask {
    labels: Vec<(String, SparseBoc)>,
    instances: Vec<Instance>,
}

impl DatalessTask {
    pub fn new(labels: Vec<(String, SparseBoc)>, instances: Vec<Instance>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 labels, got {}",
                labels.len()
            )));
        }
        let mut seen = HashSet::new();
        for (name, boc) in &labels {
            if !seen.insert(name.as_str()) {
                return Err(Error::Config(format!("duplicate label `{name}`")));
            }
            if boc.is_empty() {
                return Err(Error::Config(format!("label `{name}` has an empty BOC")));
            }
        }
        if let Some(bad) = instances.iter().find(|i| i.gold >= labels.len()) {
            return Err(Error::Config(format!(
                "instance `{}` has gold index {} with {} labels",
                bad.id,
                bad.gold,
                labels.len()
            )));
        }
        Ok(DatalessTask { labels, instances })
    }

    pub fn labels(&self) -> &[(String, SparseBoc)] {
        &self.labels
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    /// Longest label or instance BOC.
    pub fn max_boc_len(&self) -> usize {
        self.labels
            .iter()
            .map(|(_, b)| b.len())
            .chain(self.instances.iter().map(|i| i.boc.len()))
            .max()
            .unwrap_or(0)
    }

    /// Copy with every label and instance BOC cut to its top `n` concepts.
    pub fn truncated(&self, n: usize) -> DatalessTask {
        DatalessTask {
            labels: self
                .labels
                .iter()
                .map(|(l, b)| (l.clone(), b.truncate(n)))
                .collect(),
            instances: self
                .instances
                .iter()
                .map(|i| Instance {
                    id: i.id.clone(),
                    boc: i.boc.truncate(n),
                    gold: i.gold,
                })
                .collect(),
        }
    }
}

/// Fine-to-coarse label grouping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CategoryMap {
    fine_to_coarse: HashMap<String, String>,
}

impl CategoryMap {
    pub fn from_pairs<I: IntoIterator<Item = (String, String)>>(pairs: I) -> Self {
        CategoryMap {
            fine_to_coarse: pairs.into_iter().collect(),
        }
    }

    /// Reads `fine_label<TAB>coarse_label` lines.
    pub fn read_tsv<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let pairs = read_pairs(reader, source_name, "fine_label<TAB>coarse_label")?;
        let mut map = HashMap::new();
        for (line, fine, coarse) in pairs {
            if map.insert(fine.clone(), coarse).is_some() {
                return Err(Error::format(
                    source_name,
                    line,
                    format!("duplicate fine label `{fine}`"),
                ));
            }
        }
        Ok(CategoryMap {
            fine_to_coarse: map,
        })
    }

    pub fn coarse(&self, fine: &str) -> Option<&str> {
        self.fine_to_coarse.get(fine).map(String::as_str)
    }

    /// Maps a fine label to its group; other names pass through.
    pub fn map<'a>(&'a self, label: &'a str) -> &'a str {
        self.coarse(label).unwrap_or(label)
    }

    pub fn len(&self) -> usize {
        self.fine_to_coarse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fine_to_coarse.is_empty()
    }
}

fn read_pairs<R: BufRead>(
    reader: R,
    source_name: &str,
    layout: &str,
) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match line
            .split('\t')
            .map(str::trim)
            .collect::<Vec<_>>()
            .as_slice()
        {
            [a, b] if !a.is_empty() && !b.is_empty() => {
                out.push((idx + 1, a.to_string(), b.to_string()))
            }
            _ => {
                return Err(Error::format(
                    source_name,
                    idx + 1,
                    format!("expected `{layout}`"),
                ))
            }
        }
    }
    Ok(out)
}

/// Reads `instance_id<TAB>label_name` lines.
pub fn read_gold_tsv<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<(String, String)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, id, label) in read_pairs(reader, source_name, "instance_id<TAB>label_name")? {
        if !seen.insert(id.clone()) {
            return Err(Error::format(
                source_name,
                line,
                format!("duplicate instance `{id}`"),
            ));
        }
        out.push((id, label));
    }
    Ok(out)
}

/// Records dropped while assembling a task from files.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AssemblyStats {
    pub without_gold: usize,
    pub outside_classes: usize,
    /// Labels built by merging the BOCs of their fine labels.
    pub merged_labels: usize,
}

/// Builds a task from label and instance BOC records and gold labels.
///
/// With a category map, gold labels are mapped to their coarse group. A
/// coarse label with no record of its own gets the merged BOC of its fine
/// labels. `classes` selects and orders the labels; by default they follow
/// the label file.
pub fn assemble_task(
    label_records: Vec<BocRecord>,
    instance_records: Vec<BocRecord>,
    gold: &[(String, String)],
    category_map: Option<&CategoryMap>,
    classes: Option<&[String]>,
) -> Result<(DatalessTask, AssemblyStats)> {
    let empty = CategoryMap::default();
    let map = category_map.unwrap_or(&empty);
    let mut stats = AssemblyStats::default();

    let mut order: Vec<String> = Vec::new();
    let mut direct: HashMap<String, SparseBoc> = HashMap::new();
    let mut merged: HashMap<String, SparseBoc> = HashMap::new();
    for (name, boc) in label_records {
        let target = map.map(&name).to_owned();
        if !order.contains(&target) {
            order.push(target.clone());
        }
        if target == name {
            direct.insert(name, boc);
        } else {
            let slot = merged.entry(target).or_default();
            *slot = slot.merged(&boc);
        }
    }
    let mut resolve = |name: &str| -> Option<SparseBoc> {
        if let Some(b) = direct.get(name) {
            return Some(b.clone());
        }
        let b = merged.get(name)?.clone();
        stats.merged_labels += 1;
        Some(b)
    };
    let names: Vec<String> = match classes {
        Some(c) => c.to_vec(),
        None => order,
    };
    let mut labels = Vec::with_capacity(names.len());
    for name in names {
        let boc = resolve(&name)
            .ok_or_else(|| Error::Config(format!("no label BOC for class `{name}`")))?;
        labels.push((name, boc));
    }

    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, (l, _))| (l.as_str(), i))
        .collect();
    let gold: HashMap<&str, &str> = gold.iter().map(|(i, l)| (i.as_str(), map.map(l))).collect();
    let mut instances = Vec::new();
    for (id, boc) in instance_records {
        let Some(label) = gold.get(id.as_str()) else {
            stats.without_gold += 1;
            continue;
        };
        match index.get(label) {
            Some(&g) => instances.push(Instance { id, boc, gold: g }),
            None => stats.outside_classes += 1,
        }
    }
    Ok((DatalessTask::new(labels, instances)?, stats))
}

/// A similarity between BOC vectors, split into a per-vector
/// representation step and a pairwise comparison so label representations
/// are built once.
pub trait BocSimilarity: Sync {
    type Repr: Send + Sync;

    fn name(&self) -> &str;
    fn represent(&self, boc: &SparseBoc) -> Result<Self::Repr>;
    fn similarity(&self, a: &Self::Repr, b: &Self::Repr) -> Result<f64>;
}

/// Exact-match cosine over concept ids.
#[derive(Clone, Copy, Debug, Default)]
pub struct SparseStrategy;

impl BocSimilarity for SparseStrategy {
    type Repr = SparseBoc;

    fn name(&self) -> &str {
        StrategyKind::Sparse.name()
    }

    fn represent(&self, boc: &SparseBoc) -> Result<SparseBoc> {
        if boc.is_empty() {
            return Err(Error::EmptyBoc);
        }
        Ok(boc.clone())
    }

    fn similarity(&self, a: &SparseBoc, b: &SparseBoc) -> Result<f64> {
        sparse_cosine(a, b)
    }
}

/// Cosine of densified vectors.
pub struct DenseStrategy<'a, S: ?Sized, F = f32> {
    rows: &'a S,
    _real: PhantomData<F>,
}

impl<'a, S: ?Sized, F> DenseStrategy<'a, S, F> {
    pub fn new(rows: &'a S) -> Self {
        DenseStrategy {
            rows,
            _real: PhantomData,
        }
    }
}

impl<F, S> BocSimilarity for DenseStrategy<'_, S, F>
where
    F: Real + Send + Sync,
    S: RowSource<F> + Sync + ?Sized,
{
    type Repr = DenseVector<F>;

    fn name(&self) -> &str {
        StrategyKind::Dense.name()
    }

    fn represent(&self, boc: &SparseBoc) -> Result<DenseVector<F>> {
        densify(boc, self.rows)
    }

    fn similarity(&self, a: &DenseVector<F>, b: &DenseVector<F>) -> Result<f64> {
        dense_cosine(a, b)
    }
}

/// One of the alignment baselines.
pub struct AlignStrategy<'a, S: ?Sized, F = f32> {
    rows: &'a S,
    config: AlignmentConfig,
    _real: PhantomData<F>,
}

impl<'a, S: ?Sized, F> AlignStrategy<'a, S, F> {
    pub fn new(rows: &'a S, config: AlignmentConfig) -> Self {
        AlignStrategy {
            rows,
            config,
            _real: PhantomData,
        }
    }
}

impl<F, S> BocSimilarity for AlignStrategy<'_, S, F>
where
    F: Real + Send + Sync,
    S: RowSource<F> + Sync + ?Sized,
{
    type Repr = SparseBoc;

    fn name(&self) -> &str {
        match self.config.mechanism {
            Mechanism::ManyToMany => StrategyKind::ManyToMany.name(),
            Mechanism::MaxAlign => StrategyKind::MaxAlign.name(),
            Mechanism::Hungarian => StrategyKind::Hungarian.name(),
        }
    }

    fn represent(&self, boc: &SparseBoc) -> Result<SparseBoc> {
        if boc.is_empty() {
            return Err(Error::EmptyBoc);
        }
        Ok(boc.clone())
    }

    fn similarity(&self, a: &SparseBoc, b: &SparseBoc) -> Result<f64> {
        self.config.similarity(a, b, self.rows)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyKind {
    Sparse,
    Dense,
    ManyToMany,
    MaxAlign,
    Hungarian,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Sparse,
        StrategyKind::Dense,
        StrategyKind::ManyToMany,
        StrategyKind::MaxAlign,
        StrategyKind::Hungarian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Sparse => "sparse",
            StrategyKind::Dense => "dense",
            StrategyKind::ManyToMany => "many",
            StrategyKind::MaxAlign => "max",
            StrategyKind::Hungarian => "hungarian",
        }
    }

    pub fn needs_embeddings(self) -> bool {
        self != StrategyKind::Sparse
    }

    pub fn mechanism(self) -> Option<Mechanism> {
        match self {
            StrategyKind::ManyToMany => Some(Mechanism::ManyToMany),
            StrategyKind::MaxAlign => Some(Mechanism::MaxAlign),
            StrategyKind::Hungarian => Some(Mechanism::Hungarian),
            StrategyKind::Sparse | StrategyKind::Dense => None,
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown strategy `{s}` (sparse, dense, many, max, hungarian)"
                ))
            })
    }
}

/// Gold label by predicted label counts; the last column holds instances
/// that could not be classified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_labels: usize,
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(n_labels: usize) -> Self {
        ConfusionMatrix {
            n_labels,
            counts: vec![vec![0; n_labels + 1]; n_labels],
        }
    }

    pub fn record(&mut self, gold: usize, predicted: Option<usize>) {
        self.counts[gold][predicted.unwrap_or(self.n_labels)] += 1;
    }

    pub fn count(&self, gold: usize, predicted: Option<usize>) -> usize {
        self.counts[gold][predicted.unwrap_or(self.n_labels)]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.n_labels).map(|i| self.counts[i][i]).sum()
    }

    /// Micro-averaged F1 with unclassified instances counted as both a
    /// false negative and a false positive. For single-label assignment
    /// this equals accuracy.
    pub fn micro_f1(&self) -> f64 {
        let tp = self.correct() as f64;
        let fp = (self.total() - self.correct()) as f64;
        let fn_ = fp;
        if tp == 0.0 {
            return 0.0;
        }
        let precision = tp / (tp + fp);
        let recall = tp / (tp + fn_);
        2.0 * precision * recall / (precision + recall)
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.correct() as f64 / n as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub strategy: String,
    /// Predicted label index per instance, `None` when classification failed.
    pub predictions: Vec<Option<usize>>,
    pub confusion: ConfusionMatrix,
    /// Instances with an empty or unrepresentable BOC, or no comparable label.
    pub failed_instances: usize,
    /// Labels whose BOC could not be represented; they are never predicted.
    pub unusable_labels: usize,
}

impl ClassificationReport {
    pub fn micro_f1(&self) -> f64 {
        self.confusion.micro_f1()
    }

    pub fn accuracy(&self) -> f64 {
        self.confusion.accuracy()
    }

    pub fn to_report(&self, n: Option<usize>) -> EvalReport {
        EvalReport {
            rows: vec![
                ReportRow::new("micro_f1", &self.strategy, n, self.micro_f1()),
                ReportRow::new("accuracy", &self.strategy, n, self.accuracy()),
            ],
            counts: vec![
                ("instances".into(), self.predictions.len()),
                ("failed_instances".into(), self.failed_instances),
                ("unusable_labels".into(), self.unusable_labels),
            ],
            notes: vec!["micro_f1 equals accuracy for single-label assignment".into()],
        }
    }
}

/// Assigns each instance to its most similar label; ties go to the lowest
/// label index.
pub fn classify_dataless<S: BocSimilarity>(
    task: &DatalessTask,
    strategy: &S,
) -> ClassificationReport {
    let labels: Vec<Option<S::Repr>> = task
        .labels
        .par_iter()
        .map(|(name, boc)| match strategy.represent(boc) {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("label `{name}` unusable with {}: {e}", strategy.name());
                None
            }
        })
        .collect();

    let predictions: Vec<Option<usize>> = task
        .instances
        .par_iter()
        .map(|instance| {
            let repr = strategy.represent(&instance.boc).ok()?;
            let mut best: Option<(usize, f64)> = None;
            for (j, label) in labels.iter().enumerate() {
                let Some(label) = label else { continue };
                let Ok(sim) = strategy.similarity(&repr, label) else {
                    continue;
                };
                if sim.is_nan() {
                    continue;
                }
                if best.is_none_or(|(_, s)| sim > s) {
                    best = Some((j, sim));
                }
            }
            best.map(|(j, _)| j)
        })
        .collect();

    let mut confusion = ConfusionMatrix::new(task.labels.len());
    for (instance, p) in task.instances.iter().zip(&predictions) {
        confusion.record(instance.gold, *p);
    }
    ClassificationReport {
        strategy: strategy.name().to_owned(),
        failed_instances: predictions.iter().filter(|p| p.is_none()).count(),
        unusable_labels: labels.iter().filter(|l| l.is_none()).count(),
        predictions,
        confusion,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub strategy: String,
    pub points: Vec<(usize, ClassificationReport)>,
}

impl SweepReport {
    /// `(n, micro_f1)` series.
    pub fn series(&self) -> Vec<(usize, f64)> {
        self.points
            .iter()
            .map(|(n, r)| (*n, r.micro_f1()))
            .collect()
    }

    /// Highest F1 and the smallest `n` reaching it.
    pub fn best(&self) -> (usize, f64) {
        self.series().into_iter().fold(
            (0, f64::NEG_INFINITY),
            |acc, (n, f)| if f > acc.1 { (n, f) } else { acc },
        )
    }

    /// One `micro_f1` row per sweep point.
    pub fn to_report(&self) -> EvalReport {
        let (best_n, best_f1) = self.best();
        EvalReport {
            rows: self
                .series()
                .into_iter()
                .map(|(n, f)| ReportRow::new("micro_f1", &self.strategy, Some(n), f))
                .collect(),
            counts: self
                .points
                .iter()
                .map(|(n, r)| (format!("failed_instances@{n}"), r.failed_instances))
                .collect(),
            notes: vec![
                format!("best micro_f1 {best_f1:.4}@{best_n}"),
                "micro_f1 equals accuracy for single-label assignment".into(),
            ],
        }
    }
}

/// Classifies at every truncation length in `dims`.
pub fn dimension_sweep<S: BocSimilarity>(
    task: &DatalessTask,
    strategy: &S,
    dims: &[usize],
) -> Result<SweepReport> {
    if dims.is_empty() || dims[0] == 0 || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "sweep dimensions must be positive and strictly ascending, got {dims:?}"
        )));
    }
    let points = dims
        .iter()
        .map(|&n| (n, classify_dataless(&task.truncated(n), strategy)))
        .collect();
    Ok(SweepReport {
        strategy: strategy.name().to_owned(),
        points,
    })
}
