use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::network::{forward, loss_and_gradients, Dropout};
use super::params::ModelParams;
use super::vocab::EncodedInstance;
use super::{seeded_rng, streams, ModelError, TrainConfig};
use crate::corpus::Label;
use crate::eval::{Metrics, Prediction};

const EVAL_CHUNK: usize = 64;

/// An encoded instance with its gold label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub encoded: EncodedInstance,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub train_f: f64,
    pub dev_f: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
}

fn positive_probs(params: &ModelParams, items: &[&EncodedInstance]) -> Result<Vec<f64>, ModelError> {
    let mut out = Vec::with_capacity(items.len());
    for chunk in items.chunks(EVAL_CHUNK) {
        let batch: Vec<EncodedInstance> = chunk.iter().map(|e| (*e).clone()).collect();
        out.extend(forward(params, &batch, Dropout::Off)?.into_iter().map(|p| p[1]));
    }
    Ok(out)
}

fn f_score(params: &ModelParams, examples: &[Example]) -> Result<f64, ModelError> {
    let items: Vec<&EncodedInstance> = examples.iter().map(|e| &e.encoded).collect();
    let probs = positive_probs(params, &items)?;
    let pairs = probs.iter().zip(examples).map(|(p, e)| (*p >= 0.5, e.positive));
    Ok(Metrics::from_pairs(pairs).f_score)
}

/// Mini-batch gradient descent.
///
/// Batches are reshuffled every epoch from the seeded generator. After each
/// epoch the model is scored on `dev` (on `train` when `dev` is empty) and
/// the parameters of the best-scoring epoch are returned, earliest on ties.
pub fn train(
    params: ModelParams,
    train: &[Example],
    dev: &[Example],
    config: &TrainConfig,
) -> Result<(ModelParams, History), ModelError> {
    config.validate()?;
    let mut params = params;
    let mut history = History::default();
    let mut best: Option<(f64, ModelParams)> = None;
    let mut shuffle_rng = seeded_rng(config.seed, streams::SHUFFLE);
    let mut dropout_rng = seeded_rng(config.seed, streams::DROPOUT);
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<EncodedInstance> = chunk.iter().map(|&i| train[i].encoded.clone()).collect();
            let labels: Vec<bool> = chunk.iter().map(|&i| train[i].positive).collect();
            let dropout = Dropout::On {
                keep: config.dropout_keep,
                rng: &mut dropout_rng,
            };
            let (batch_loss, grad) =
                loss_and_gradients(&params, &batch, &labels, config.class_weight_positive, dropout)?;
            if !batch_loss.is_finite() {
                return Err(ModelError::NonFiniteLoss { epoch });
            }
            total += batch_loss * chunk.len() as f64;
            params.apply_update(&grad, config.learning_rate);
        }
        if !params.is_finite() {
            return Err(ModelError::NonFiniteLoss { epoch });
        }
        let train_loss = if train.is_empty() { 0.0 } else { total / train.len() as f64 };
        let train_f = f_score(&params, train)?;
        let dev_f = if dev.is_empty() { train_f } else { f_score(&params, dev)? };
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            train_f,
            dev_f,
        });
        if best.as_ref().map_or(true, |(f, _)| dev_f > *f) {
            best = Some((dev_f, params.clone()));
            history.best_epoch = Some(epoch);
        }
    }
    Ok((best.map_or(params, |(_, p)| p), history))
}

/// Evaluation-mode predictions; positive when `prob >= threshold`.
pub fn predict(
    params: &ModelParams,
    instances: &[(String, EncodedInstance)],
    threshold: f64,
) -> Result<Vec<Prediction>, ModelError> {
    let items: Vec<&EncodedInstance> = instances.iter().map(|(_, e)| e).collect();
    let probs = positive_probs(params, &items)?;
    Ok(instances
        .iter()
        .zip(probs)
        .map(|((id, _), p)| Prediction {
            instance_id: id.clone(),
            prob_positive: p,
            label: Label::from_flag(p >= threshold),
        })
        .collect())
}
