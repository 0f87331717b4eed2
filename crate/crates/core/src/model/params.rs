use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::vocab::Vocabulary;
use super::{seeded_rng, streams, ChannelSpec, ModelError, TrainConfig};

pub const INIT_SCALE: f64 = 0.08;

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn cols(&self) -> usize {
        self.shape.last().copied().unwrap_or(1)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[r * c..(r + 1) * c]
    }

    fn fill_uniform<R: Rng>(&mut self, rng: &mut R, scale: f64) {
        for v in &mut self.data {
            *v = rng.gen_range(-scale..scale);
        }
    }
}

/// Weights of one LSTM direction. Gate blocks are stacked i, f, o, g.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// `4H x E`
    pub w_input: Tensor,
    /// `4H x H`
    pub w_recurrent: Tensor,
    /// `4H`
    pub bias: Tensor,
}

impl LstmParams {
    fn zeros(embed: usize, hidden: usize) -> Self {
        LstmParams {
            w_input: Tensor::zeros(&[4 * hidden, embed]),
            w_recurrent: Tensor::zeros(&[4 * hidden, hidden]),
            bias: Tensor::zeros(&[4 * hidden]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.bias.len() / 4
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// `vocab x E`; row 0 is padding and stays zero.
    pub embedding: Tensor,
    pub forward: LstmParams,
    pub backward: LstmParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub specs: Vec<ChannelSpec>,
    pub channels: Vec<ChannelParams>,
    /// `(sum of 2H) x dense`
    pub dense_weight: Tensor,
    pub dense_bias: Tensor,
    /// `dense x 2`
    pub output_weight: Tensor,
    pub output_bias: Tensor,
}

impl ModelParams {
    /// All-zero parameters with the shapes implied by `specs`.
    pub fn zeros(specs: &[ChannelSpec], dense_dim: usize) -> Self {
        let channels = specs
            .iter()
            .map(|s| ChannelParams {
                embedding: Tensor::zeros(&[s.vocab_size, s.embed_dim]),
                forward: LstmParams::zeros(s.embed_dim, s.hidden_dim),
                backward: LstmParams::zeros(s.embed_dim, s.hidden_dim),
            })
            .collect();
        let features = feature_width(specs);
        ModelParams {
            specs: specs.to_vec(),
            channels,
            dense_weight: Tensor::zeros(&[features, dense_dim]),
            dense_bias: Tensor::zeros(&[dense_dim]),
            output_weight: Tensor::zeros(&[dense_dim, 2]),
            output_bias: Tensor::zeros(&[2]),
        }
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams::zeros(&self.specs, self.dense_dim())
    }

    pub fn dense_dim(&self) -> usize {
        self.dense_bias.len()
    }

    /// Width of the concatenated channel states feeding the dense layer.
    pub fn feature_width(&self) -> usize {
        feature_width(&self.specs)
    }

    /// Every tensor with a stable dotted name, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (spec, ch) in self.specs.iter().zip(&self.channels) {
            let n = spec.name.as_str();
            out.push((format!("{n}.embedding"), &ch.embedding));
            for (dir, lstm) in [("forward", &ch.forward), ("backward", &ch.backward)] {
                out.push((format!("{n}.{dir}.w_input"), &lstm.w_input));
                out.push((format!("{n}.{dir}.w_recurrent"), &lstm.w_recurrent));
                out.push((format!("{n}.{dir}.bias"), &lstm.bias));
            }
        }
        out.push(("dense.weight".into(), &self.dense_weight));
        out.push(("dense.bias".into(), &self.dense_bias));
        out.push(("output.weight".into(), &self.output_weight));
        out.push(("output.bias".into(), &self.output_bias));
        out
    }

    /// Mutable counterpart of [`ModelParams::tensors`], same order.
    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for ch in &mut self.channels {
            out.push(&mut ch.embedding);
            for lstm in [&mut ch.forward, &mut ch.backward] {
                out.push(&mut lstm.w_input);
                out.push(&mut lstm.w_recurrent);
                out.push(&mut lstm.bias);
            }
        }
        out.push(&mut self.dense_weight);
        out.push(&mut self.dense_bias);
        out.push(&mut self.output_weight);
        out.push(&mut self.output_bias);
        out
    }

    /// Rebuilds parameters from named tensors, checking every shape.
    pub fn from_named<F>(specs: &[ChannelSpec], dense_dim: usize, mut take: F) -> Result<Self, ModelError>
    where
        F: FnMut(&str) -> Option<Tensor>,
    {
        let mut params = ModelParams::zeros(specs, dense_dim);
        let names: Vec<String> = params.tensors().into_iter().map(|(n, _)| n).collect();
        for (name, slot) in names.iter().zip(params.tensors_mut()) {
            let tensor = take(name).ok_or_else(|| ModelError::MissingTensor(name.clone()))?;
            if tensor.shape != slot.shape || tensor.data.len() != slot.data.len() {
                return Err(ModelError::ShapeMismatch(format!(
                    "{name}: expected {:?}, found {:?} with {} values",
                    slot.shape,
                    tensor.shape,
                    tensor.data.len()
                )));
            }
            if tensor.data.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::NonFiniteTensor(name.clone()));
            }
            *slot = tensor;
        }
        Ok(params)
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.data.iter().all(|v| v.is_finite()))
    }

    /// `self -= rate * grad`, tensor by tensor.
    pub fn apply_update(&mut self, grad: &ModelParams, rate: f64) {
        let grads: Vec<&Tensor> = grad.tensors().into_iter().map(|(_, t)| t).collect();
        for (p, g) in self.tensors_mut().into_iter().zip(grads) {
            for (pv, gv) in p.data.iter_mut().zip(&g.data) {
                *pv -= rate * gv;
            }
        }
    }
}

pub(super) fn feature_width(specs: &[ChannelSpec]) -> usize {
    specs.iter().map(|s| 2 * s.hidden_dim).sum()
}

/// Uniform `[-0.08, 0.08)` weights from the seeded generator, forget-gate
/// biases at 1.0 and zero padding rows.
pub fn init_params(specs: &[ChannelSpec], config: &TrainConfig) -> Result<ModelParams, ModelError> {
    for spec in specs {
        spec.validate()?;
    }
    if config.dense_dim == 0 {
        return Err(ModelError::InvalidConfig);
    }
    let mut rng = seeded_rng(config.seed, streams::INIT);
    let mut params = ModelParams::zeros(specs, config.dense_dim);
    for tensor in params.tensors_mut() {
        tensor.fill_uniform(&mut rng, INIT_SCALE);
    }
    for ch in &mut params.channels {
        ch.embedding.row_mut(0).fill(0.0);
        for lstm in [&mut ch.forward, &mut ch.backward] {
            let h = lstm.hidden();
            lstm.bias.data[h..2 * h].fill(1.0);
        }
    }
    Ok(params)
}

/// Embedding matrix for `vocab` seeded from pretrained `vectors`.
///
/// Every row past padding first receives `dim` uniform draws from the
/// vectors stream, so a missing word's row depends only on the seed and its
/// index. Rows of words present in `vectors` are then overwritten.
pub fn pretrained_embedding(
    vocab: &Vocabulary,
    vectors: &BTreeMap<String, Vec<f64>>,
    dim: usize,
    seed: u64,
) -> Result<Tensor, ModelError> {
    if let Some(v) = vectors.values().find(|v| v.len() != dim) {
        return Err(ModelError::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    let mut rng = seeded_rng(seed, streams::VECTORS);
    let mut table = Tensor::zeros(&[vocab.len(), dim]);
    for (r, token) in vocab.tokens().iter().enumerate().skip(1) {
        let row = table.row_mut(r);
        for v in row.iter_mut() {
            *v = rng.gen_range(-INIT_SCALE..INIT_SCALE);
        }
        if let Some(pre) = vectors.get(token) {
            row.copy_from_slice(pre);
        }
    }
    Ok(table)
}
