//! Run configuration: a JSON file whose relative paths are resolved against
//! the file's own directory. Validation happens before any input is parsed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use biont_core::model::{ChannelKind, TrainConfig};
use biont_core::onto::Namespace;
use serde::Deserialize;

use crate::error::PipelineError;
use crate::pgr::ColumnMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusKind {
    /// Drug-drug interactions, XML.
    Ddi,
    /// Gene-phenotype relations, TSV.
    Pgr,
    /// Chemical-induced disease relations, PubTator.
    Cdr,
}

impl CorpusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CorpusKind::Ddi => "ddi",
            CorpusKind::Pgr => "pgr",
            CorpusKind::Cdr => "cdr",
        }
    }

    /// Ontologies the corpus entity types are routed to.
    pub fn required_ontologies(self) -> &'static [Namespace] {
        match self {
            CorpusKind::Ddi => &[Namespace::Chebi],
            CorpusKind::Pgr => &[Namespace::Go, Namespace::Hp],
            CorpusKind::Cdr => &[Namespace::Chebi, Namespace::Doid],
        }
    }

    /// Whether both pair members come from one ontology, so a common
    /// ancestor chain exists.
    pub fn same_ontology_pairs(self) -> bool {
        self == CorpusKind::Ddi
    }
}

/// Which input channels feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelFlags {
    pub words: bool,
    pub classes: bool,
    pub onto_concat: bool,
    /// Unset means enabled exactly for same-ontology corpora.
    pub onto_common: Option<bool>,
}

impl Default for ChannelFlags {
    fn default() -> Self {
        ChannelFlags {
            words: true,
            classes: true,
            onto_concat: true,
            onto_common: None,
        }
    }
}

/// Embedding and LSTM widths per channel family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Dims {
    pub word_embed: usize,
    pub class_embed: usize,
    pub onto_embed: usize,
    pub hidden: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Dims {
            word_embed: 100,
            class_embed: 50,
            onto_embed: 50,
            hidden: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusKind,
    /// Corpus file, or a directory whose files are read in name order.
    /// `--in` overrides it for preprocessing.
    #[serde(default)]
    pub corpus_path: Option<PathBuf>,
    /// OBO file per namespace (`go`, `hp`, `doid`, `chebi`).
    #[serde(default)]
    pub ontologies: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub gaf: Option<PathBuf>,
    /// Cross-reference table per target namespace.
    #[serde(default)]
    pub xrefs: BTreeMap<String, PathBuf>,
    pub lexicon: PathBuf,
    #[serde(default)]
    pub vectors: Option<PathBuf>,
    /// CoNLL-U file with a `# sent_id` per sentence.
    pub parses: PathBuf,
    #[serde(default)]
    pub column_map: Option<ColumnMap>,
    /// Share of sentence groups used for training; the rest is evaluated.
    /// Unset means the instances file is used whole by every command.
    #[serde(default)]
    pub split_fraction: Option<f64>,
    /// Share of training sentence groups held out for epoch selection.
    #[serde(default)]
    pub dev_fraction: f64,
    /// Overrides `train.seed` when set.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub channels: ChannelFlags,
    #[serde(default)]
    pub dims: Dims,
}

fn config_error(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

impl RunConfig {
    /// Reads, resolves and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_json(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let mut config: RunConfig = serde_json::from_str(text)?;
        if let Some(seed) = config.seed {
            config.train.seed = seed;
        }
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.corpus_path.iter_mut().for_each(join);
        self.ontologies.values_mut().for_each(join);
        self.gaf.iter_mut().for_each(join);
        self.xrefs.values_mut().for_each(join);
        join(&mut self.lexicon);
        self.vectors.iter_mut().for_each(join);
        join(&mut self.parses);
    }

    /// Ontology paths keyed by parsed namespace.
    pub fn ontology_paths(&self) -> Result<BTreeMap<Namespace, &Path>, PipelineError> {
        namespaced(&self.ontologies, "ontologies")
    }

    pub fn xref_paths(&self) -> Result<BTreeMap<Namespace, &Path>, PipelineError> {
        namespaced(&self.xrefs, "xrefs")
    }

    pub fn onto_common_enabled(&self) -> bool {
        self.channels
            .onto_common
            .unwrap_or(self.corpus.same_ontology_pairs())
    }

    /// Enabled channels in canonical order.
    pub fn channel_kinds(&self) -> Vec<ChannelKind> {
        let c = &self.channels;
        ChannelKind::ALL
            .into_iter()
            .filter(|k| match k {
                ChannelKind::Words => c.words,
                ChannelKind::Classes => c.classes,
                ChannelKind::OntoConcat => c.onto_concat,
                ChannelKind::OntoCommon => self.onto_common_enabled(),
            })
            .collect()
    }

    /// Longest token sequence kept per channel.
    pub fn max_len(&self, kind: ChannelKind) -> usize {
        match kind {
            ChannelKind::Words | ChannelKind::Classes => self.train.max_sdp_len,
            ChannelKind::OntoConcat => 2 * self.train.max_chain_len,
            ChannelKind::OntoCommon => self.train.max_chain_len,
        }
    }

    pub fn embed_dim(&self, kind: ChannelKind) -> usize {
        match kind {
            ChannelKind::Words => self.dims.word_embed,
            ChannelKind::Classes => self.dims.class_embed,
            ChannelKind::OntoConcat | ChannelKind::OntoCommon => self.dims.onto_embed,
        }
    }

    /// `corpus/channel+channel`, the label of the metrics row.
    pub fn configuration_label(corpus: CorpusKind, kinds: impl IntoIterator<Item = ChannelKind>) -> String {
        let names: Vec<&str> = kinds.into_iter().map(ChannelKind::as_str).collect();
        format!("{}/{}", corpus.as_str(), names.join("+"))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let ontologies = self.ontology_paths()?;
        self.xref_paths()?;
        for ns in self.corpus.required_ontologies() {
            if !ontologies.contains_key(ns) {
                return Err(config_error(format!(
                    "corpus {} needs an ontology for namespace {ns}",
                    self.corpus.as_str()
                )));
            }
        }
        if self.corpus == CorpusKind::Pgr && self.gaf.is_none() {
            return Err(config_error("corpus pgr needs a gaf file"));
        }
        if self.column_map.is_some() && self.corpus != CorpusKind::Pgr {
            return Err(config_error("column_map applies to corpus pgr only"));
        }
        if self.channels.onto_common == Some(true) && !self.corpus.same_ontology_pairs() {
            return Err(config_error(format!(
                "onto_common needs both pair members in one ontology, which corpus {} does not have",
                self.corpus.as_str()
            )));
        }
        if self.channel_kinds().is_empty() {
            return Err(config_error("no input channel is enabled"));
        }
        if let Some(f) = self.split_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(config_error(format!("split_fraction {f} is outside (0, 1)")));
            }
        }
        if !(0.0..1.0).contains(&self.dev_fraction) {
            return Err(config_error(format!("dev_fraction {} is outside [0, 1)", self.dev_fraction)));
        }
        let d = &self.dims;
        if [d.word_embed, d.class_embed, d.onto_embed, d.hidden].contains(&0) {
            return Err(config_error("dims must be positive"));
        }
        self.train
            .validate()
            .map_err(|e| config_error(format!("train: {e}")))?;
        let inputs = self
            .corpus_path
            .iter()
            .chain(self.ontologies.values())
            .chain(&self.gaf)
            .chain(self.xrefs.values())
            .chain([&self.lexicon, &self.parses])
            .chain(&self.vectors);
        for path in inputs {
            if !path.exists() {
                return Err(config_error(format!("input {} does not exist", path.display())));
            }
        }
        Ok(())
    }
}

fn namespaced<'a>(
    paths: &'a BTreeMap<String, PathBuf>,
    field: &str,
) -> Result<BTreeMap<Namespace, &'a Path>, PipelineError> {
    paths
        .iter()
        .map(|(key, path)| {
            Namespace::from_str(key)
                .map(|ns| (ns, path.as_path()))
                .map_err(|e| config_error(format!("{field}: {e}")))
        })
        .collect()
}
