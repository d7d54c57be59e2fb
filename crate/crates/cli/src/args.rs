use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "conceptvec",
    version,
    about = "Concept embeddings and bag-of-concepts densification"
)]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count tokens of an annotated corpus into a vocabulary file.
    BuildVocab(BuildVocabArgs),
    /// Train CRC or 3C embeddings.
    Train(TrainArgs),
    /// Build BOC vectors for texts from a concept index over the corpus.
    BuildBoc(BuildBocArgs),
    /// Densify every record of a BOC file.
    Densify(DensifyArgs),
    /// Print the similarity of two embeddings or two BOC records.
    Sim(SimArgs),
    /// Rank relatedness candidates and report nDCG@k and MAP.
    EvalRelatedness(EvalRelatednessArgs),
    /// Dataless classification, optionally swept over BOC lengths.
    EvalDataless(EvalDatalessArgs),
    /// Write the synthetic mini corpus bundle.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Crc,
    #[value(name = "3c")]
    ThreeC,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Sparse,
    Dense,
    Many,
    Max,
    Hungarian,
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    #[arg(long, value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    /// `alias<TAB>target` redirect table.
    #[arg(long, value_name = "PATH")]
    pub redirects: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BuildVocabArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Stream to count: words and concepts, or concepts only.
    #[arg(long)]
    pub mode: Option<ModelArg>,
    /// Minimum count for both words and concepts.
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub min_count_words: Option<u64>,
    #[arg(long)]
    pub min_count_concepts: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[arg(long, value_name = "PATH")]
    pub vocab: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub min_lr: Option<f64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Frequent-token subsampling threshold.
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug)]
pub struct BuildBocArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    /// `record_id<TAB>text` lines.
    #[arg(long, value_name = "PATH")]
    pub texts: Option<PathBuf>,
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DensifyArgs {
    #[arg(long, value_name = "PATH")]
    pub boc: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub embeddings: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug)]
pub struct SimArgs {
    #[arg(long, value_name = "PATH")]
    pub embeddings: Option<PathBuf>,
    /// Embedding key (word or concept id).
    #[arg(long, requires = "b", conflicts_with_all = ["boc", "boc_a", "boc_b"])]
    pub a: Option<String>,
    #[arg(long, requires = "a")]
    pub b: Option<String>,
    /// BOC file holding the records compared with `--boc-a` and `--boc-b`.
    #[arg(long, value_name = "PATH", requires_all = ["boc_a", "boc_b"])]
    pub boc: Option<PathBuf>,
    #[arg(long, requires = "boc")]
    pub boc_a: Option<String>,
    #[arg(long, requires = "boc")]
    pub boc_b: Option<String>,
    #[arg(long)]
    pub mechanism: Option<StrategyArg>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EvalRelatednessArgs {
    /// `query_id<TAB>candidate_id<TAB>0|1` lines.
    #[arg(long, value_name = "PATH")]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub embeddings: Option<PathBuf>,
    /// Comma-separated nDCG cutoffs.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// CSV output path; CSV goes to stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalDatalessArgs {
    #[arg(long, value_name = "PATH")]
    pub labels: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub instances: Option<PathBuf>,
    /// `instance_id<TAB>label_name` lines.
    #[arg(long, value_name = "PATH")]
    pub gold: Option<PathBuf>,
    /// `fine_label<TAB>coarse_label` lines.
    #[arg(long, value_name = "PATH")]
    pub categories: Option<PathBuf>,
    /// Comma-separated label subset, in tie-break order.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<String>>,
    #[arg(long, value_name = "PATH")]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub strategy: Option<StrategyArg>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Comma-separated BOC lengths, ascending.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<usize>>,
    /// CSV output path; CSV goes to stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// BOC length for the bundled label and instance vectors.
    #[arg(long)]
    pub top_n: Option<usize>,
}
