//! Concept embeddings and bag-of-concepts densification.
//!
//! The crate covers the whole pipeline:
//!
//! - [`corpus`]: parsing concept-annotated text into CRC (words and concepts)
//!   and 3C (concepts only) token streams, plus the [`vocab`] lexicon.
//! - [`train`]: skip-gram with negative sampling over those streams.
//! - [`boc`]: sparse bag-of-concepts vectors, TF-IDF concept index and the
//!   exact-match cosine.
//! - [`densify`]: weighted-average densification and the alignment-based
//!   baselines (many-to-many, best match, Hungarian one-to-one).
//! - [`eval`]: entity relatedness ranking (nDCG, MAP) and dataless
//!   classification with dimension sweeps.

pub mod assignment;
pub mod boc;
pub mod corpus;
pub mod densify;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod synth;
pub mod train;
pub mod vocab;

pub use boc::{ConceptIndex, SparseBoc};
pub use corpus::{AnnotatedDocument, RedirectMap, Token, TokenStream};
pub use densify::{AlignmentConfig, DenseVector, Mechanism, RowSource};
pub use embeddings::{EmbeddingFormat, EmbeddingStore, Matrix, Real};
pub use error::{Error, Result};
pub use eval::{DatalessTask, EvalReport, RelatednessQuery};
pub use train::{Model, TrainConfig};
pub use vocab::Vocabulary;
