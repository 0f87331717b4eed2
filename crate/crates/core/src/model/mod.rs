//! Multichannel bidirectional LSTM pair classifier.
//!
//! Each enabled channel embeds its token sequence, runs a forward and a
//! backward LSTM over it and contributes both final hidden states. The
//! concatenated states feed a tanh dense layer and a two-way softmax
//! (column 0 negative, column 1 positive). All arithmetic is `f64`.

mod network;
mod params;
mod train;
mod vocab;

use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use network::{forward, gradients, loss, loss_and_gradients, Dropout};
pub use params::{init_params, pretrained_embedding, ChannelParams, LstmParams, ModelParams, Tensor, INIT_SCALE};
pub use train::{predict, train, EpochRecord, Example, History};
pub use vocab::{build_vocabularies, channel_sequence, encode, EncodedInstance, Vocabulary, OOV, PAD};

/// Random stream ids carved out of the run seed.
pub mod streams {
    pub const INIT: u64 = 0;
    pub const SHUFFLE: u64 = 1;
    pub const DROPOUT: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const VECTORS: u64 = 4;
}

/// Seeded generator used for every random draw in the crate.
pub fn seeded_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Words,
    Classes,
    OntoConcat,
    OntoCommon,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 4] = [
        ChannelKind::Words,
        ChannelKind::Classes,
        ChannelKind::OntoConcat,
        ChannelKind::OntoCommon,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Words => "words",
            ChannelKind::Classes => "classes",
            ChannelKind::OntoConcat => "onto_concat",
            ChannelKind::OntoCommon => "onto_common",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub name: ChannelKind,
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub max_len: usize,
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.vocab_size == 0 || self.embed_dim == 0 || self.hidden_dim == 0 || self.max_len == 0 {
            return Err(ModelError::InvalidSpec(self.name));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub dropout_keep: f64,
    pub seed: u64,
    pub max_sdp_len: usize,
    pub max_chain_len: usize,
    pub class_weight_positive: f64,
    pub dense_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 20,
            batch_size: 16,
            dropout_keep: 0.5,
            seed: 1,
            max_sdp_len: 10,
            max_chain_len: 12,
            class_weight_positive: 1.0,
            dense_dim: 64,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = self.learning_rate >= 0.0
            && self.learning_rate.is_finite()
            && self.batch_size >= 1
            && self.dropout_keep > 0.0
            && self.dropout_keep <= 1.0
            && self.max_sdp_len >= 2
            && self.max_chain_len >= 1
            && self.class_weight_positive > 0.0
            && self.class_weight_positive.is_finite()
            && self.dense_dim >= 1;
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidConfig)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("vector dimension {found} does not match configured {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed vector line {line}")]
    MalformedVectorLine { line: usize },
    #[error("channel {0} has a zero dimension")]
    InvalidSpec(ChannelKind),
    #[error("invalid training configuration")]
    InvalidConfig,
    #[error("missing tensor {0}")]
    MissingTensor(String),
    #[error("tensor {0} holds a non-finite value")]
    NonFiniteTensor(String),
}
