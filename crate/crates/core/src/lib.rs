//! Core algorithms for ontology-aware biomedical relation extraction.
//!
//! This crate is `no_std` (with `alloc`). It holds everything that does not
//! touch a file system: the ontology DAG and its ancestry queries, the
//! uniform corpus model with sentence segmentation and relation projection,
//! candidate-pair instance construction over dependency parses, the
//! multichannel bidirectional LSTM classifier and the evaluation metrics.
//!
//! File formats, IO and the command-line pipeline live in the `biont` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod corpus;
pub mod eval;
pub mod instance;
pub mod model;
pub mod onto;
pub mod text;

pub use corpus::{EntityMention, EntityType, GoldRelation, Label, RelationLevel, SentenceRecord};
pub use eval::{Metrics, Prediction};
pub use instance::{Instance, ParsedToken, SupersenseLexicon};
pub use model::{ChannelKind, ChannelSpec, ModelParams, TrainConfig};
pub use onto::{AnnotationRecord, Namespace, OntologyConcept, OntologyGraph};
