//! Linear-chain CRF sequence tagger over hashed token features.

mod dp;
mod features;
mod model;
mod potentials;
mod train;

pub use dp::{forward_log_partition, marginals, viterbi, Marginals};
pub use features::{extract_all, extract_features, word_shape, FeatureVector, HASH_BITS, HASH_SPACE};
pub use model::{nll_and_gradient, CrfGradient, CrfModel, EmissionTable};
pub use potentials::Potentials;
pub use train::{predict, train, train_with_log, TrainConfig, DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE};
