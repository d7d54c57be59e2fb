//! Skip-gram training for the CRC and 3C concept models.

mod config;
mod contexts;
mod objective;
mod sgd;

pub use config::{LearningRate, Model, TrainConfig};
pub use contexts::{context_pairs, generate_contexts, pair_count, ContextPair};
pub use objective::{
    exact_softmax_loss, log_sigmoid, ns_objective, ns_step_gradient, sigmoid,
    softmax_loss_from_logits, NsGradient,
};
pub use sgd::{corpus_pair_count, encode_corpus, train, train_encoded, EpochStats, Trainer};
