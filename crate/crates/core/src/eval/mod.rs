//! Evaluation protocols: entity relatedness ranking and dataless
//! classification.

pub mod dataless;
pub mod relatedness;
pub mod report;

pub use dataless::{
    assemble_task, classify_dataless, dimension_sweep, read_gold_tsv, AlignStrategy, AssemblyStats,
    BocSimilarity, CategoryMap, ClassificationReport, ConfusionMatrix, DatalessTask, DenseStrategy,
    Instance, SparseStrategy, StrategyKind, SweepReport,
};
pub use relatedness::{
    average_precision, evaluate_relatedness, mean_average_precision, ndcg_at_k, rank_candidates,
    read_relatedness_tsv, RankedCandidate, RelatednessQuery, RelatednessReport,
};
pub use report::{EvalReport, ReportRow, CSV_HEADER};
