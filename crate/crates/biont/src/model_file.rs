//! Trained model persistence as one JSON document:
//! `{version, specs, vocabularies: {channel: [tokens]}, tensors: {name: {shape, data}}}`.

use std::collections::BTreeMap;

use biont_core::model::{ChannelSpec, ModelError, ModelParams, Tensor, Vocabulary};
use serde::{Deserialize, Serialize};

use crate::error::FormatError;

pub const MODEL_VERSION: &str = "biont-model/1";

/// Parameters plus everything needed to encode new instances for them.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub specs: Vec<ChannelSpec>,
    /// One per spec, same order.
    pub vocabularies: Vec<Vocabulary>,
    pub params: ModelParams,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: String,
    specs: Vec<ChannelSpec>,
    vocabularies: BTreeMap<String, Vocabulary>,
    tensors: BTreeMap<String, Tensor>,
}

impl SavedModel {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            version: MODEL_VERSION.to_string(),
            specs: self.specs.clone(),
            vocabularies: self
                .specs
                .iter()
                .zip(&self.vocabularies)
                .map(|(s, v)| (s.name.as_str().to_string(), v.clone()))
                .collect(),
            tensors: self
                .params
                .tensors()
                .into_iter()
                .map(|(name, t)| (name, t.clone()))
                .collect(),
        };
        let mut text = serde_json::to_string(&file).expect("model serializes to JSON");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let json = |source| FormatError::Json { line: 1, source };
        let value: serde_json::Value = serde_json::from_str(text).map_err(json)?;
        let version = value.get("version").and_then(|v| v.as_str()).unwrap_or_default();
        if version != MODEL_VERSION {
            return Err(FormatError::VersionMismatch {
                found: version.to_string(),
                expected: MODEL_VERSION.to_string(),
            });
        }
        let mut file: ModelFile = serde_json::from_value(value).map_err(json)?;
        let mut vocabularies = Vec::with_capacity(file.specs.len());
        for spec in &file.specs {
            spec.validate()?;
            let vocab = file
                .vocabularies
                .remove(spec.name.as_str())
                .ok_or_else(|| ModelError::ShapeMismatch(format!("no vocabulary for channel {}", spec.name)))?;
            if vocab.len() != spec.vocab_size {
                return Err(ModelError::ShapeMismatch(format!(
                    "channel {} declares {} tokens but its vocabulary has {}",
                    spec.name,
                    spec.vocab_size,
                    vocab.len()
                ))
                .into());
            }
            vocabularies.push(vocab);
        }
        if let Some(extra) = file.vocabularies.keys().next() {
            return Err(ModelError::ShapeMismatch(format!("vocabulary {extra} has no channel")).into());
        }
        let dense_dim = file
            .tensors
            .get("dense.bias")
            .map(|t| t.len())
            .ok_or_else(|| ModelError::MissingTensor("dense.bias".into()))?;
        let params = ModelParams::from_named(&file.specs, dense_dim, |name| file.tensors.remove(name))?;
        if let Some(extra) = file.tensors.keys().next() {
            return Err(ModelError::ShapeMismatch(format!("unexpected tensor {extra}")).into());
        }
        Ok(SavedModel {
            specs: file.specs,
            vocabularies,
            params,
        })
    }
}
