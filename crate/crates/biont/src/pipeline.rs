//! The four pipeline commands. Each `cmd_*` function reads its inputs,
//! writes its outputs and returns; the pure steps in between are public so
//! they can be driven without touching the file system.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use biont_core::corpus::{Corpus, Label};
use biont_core::eval::{compute_metrics, split_dataset, Metrics, Prediction};
use biont_core::instance::{generate_instances, ConceptResolver, Instance};
use biont_core::model::{
    build_vocabularies, encode, init_params, predict, pretrained_embedding, train, ChannelKind, ChannelSpec,
    EncodedInstance, Example, History,
};
use biont_core::onto::{AnnotationIndex, OntologyBank};

use crate::config::{CorpusKind, RunConfig};
use crate::error::{FormatError, PipelineError};
use crate::model_file::SavedModel;
use crate::reports::{diagnostics_report, history_report, metrics_report, PreprocessSummary};
use crate::vectors::{parse_word_vectors, WordVectors};
use crate::{conllu, ddi, gaf, jsonl, obo, pgr, pubtator, tables, OffsetPolicy};

const OFFSET_MISMATCH: &str = "OffsetMismatch";

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `out` with `suffix` appended to its file name.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    out.with_file_name(name)
}

/// Files of a corpus: the path itself, or a directory's files in name order.
fn corpus_files(path: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let io = |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.is_file() {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Reads a corpus, skipping mentions whose offsets do not match.
pub fn load_corpus(config: &RunConfig, path: &Path) -> Result<Corpus, PipelineError> {
    let policy = OffsetPolicy::Skip;
    let column_map = config.column_map.clone().unwrap_or_default();
    let mut corpus = Corpus::default();
    for file in corpus_files(path)? {
        let text = read(&file)?;
        let parsed = match config.corpus {
            CorpusKind::Ddi => ddi::parse_ddi_xml(&text, policy),
            CorpusKind::Pgr => pgr::parse_pgr_tsv(&text, &column_map, policy),
            CorpusKind::Cdr => pubtator::parse_pubtator(&text, policy).map(pubtator::project_corpus),
        };
        corpus.extend(parsed.map_err(PipelineError::format(&file))?);
    }
    Ok(corpus)
}

/// Ontologies, cross-references and gene annotations named by the config.
pub fn load_resolver(config: &RunConfig) -> Result<ConceptResolver, PipelineError> {
    let mut ontologies = OntologyBank::new();
    for (ns, path) in config.ontology_paths()? {
        ontologies.insert(obo::parse_obo(&read(path)?, ns).map_err(PipelineError::format(path))?);
    }
    let mut xrefs = BTreeMap::new();
    for (ns, path) in config.xref_paths()? {
        xrefs.insert(ns, tables::parse_xrefs(&read(path)?).map_err(PipelineError::format(path))?);
    }
    let records = match &config.gaf {
        Some(path) => gaf::parse_gaf(&read(path)?).map_err(PipelineError::format(path))?,
        None => Vec::new(),
    };
    Ok(ConceptResolver {
        ontologies,
        xrefs,
        annotations: AnnotationIndex::new(records),
    })
}

/// Corpus to labeled instances plus the counters of the diagnostics report.
pub fn preprocess(config: &RunConfig, input: &Path) -> Result<(Vec<Instance>, PreprocessSummary), PipelineError> {
    let resolver = load_resolver(config)?;
    let lexicon = tables::parse_lexicon(&read(&config.lexicon)?).map_err(PipelineError::format(&config.lexicon))?;
    let corpus = load_corpus(config, input)?;
    let (parses, parse_flags) =
        conllu::load_parses(&read(&config.parses)?, &corpus.sentences).map_err(PipelineError::format(&config.parses))?;
    let generation = generate_instances(&corpus, &resolver, &lexicon, &parses, true);

    let dropped_pairs = corpus.diagnostics.get(OFFSET_MISMATCH);
    let mut summary = PreprocessSummary {
        gold_pairs: corpus.relations.len() + dropped_pairs,
        instances: generation.instances.len(),
        skipped: generation.skipped,
        flags: generation.flags,
    };
    summary.skipped.add(OFFSET_MISMATCH, dropped_pairs);
    for (name, n) in corpus.diagnostics.iter().chain(parse_flags.iter()) {
        if name != OFFSET_MISMATCH {
            summary.flags.add(name, n);
        }
    }
    Ok((generation.instances, summary))
}

/// Writes `out` (instances) and `out.diagnostics.tsv`.
pub fn cmd_preprocess(config: &RunConfig, input: Option<&Path>, out: &Path) -> Result<PreprocessSummary, PipelineError> {
    let input = input
        .or(config.corpus_path.as_deref())
        .ok_or_else(|| PipelineError::Config("no corpus: pass --in or set corpus_path".into()))?;
    let (instances, summary) = preprocess(config, input)?;
    write(out, &jsonl::to_jsonl(&instances))?;
    write(&sibling(out, ".diagnostics.tsv"), &diagnostics_report(&summary))?;
    Ok(summary)
}

pub fn read_instances(path: &Path) -> Result<Vec<Instance>, PipelineError> {
    let instances: Vec<Instance> = jsonl::from_jsonl(&read(path)?).map_err(PipelineError::format(path))?;
    if let Some(bad) = instances.iter().find(|i| !i.is_well_formed()) {
        return Err(PipelineError::Data(format!(
            "{}: instance {} has no well-formed dependency path",
            path.display(),
            bad.instance_id
        )));
    }
    Ok(instances)
}

/// The training and evaluation sides of `instances` under the config split.
/// Without a split both sides are the whole set.
pub fn split_sides(config: &RunConfig, instances: Vec<Instance>) -> (Vec<Instance>, Vec<Instance>) {
    match config.split_fraction {
        Some(f) => split_dataset(instances, |i| i.sentence_id.as_str(), f, config.train.seed),
        None => (instances.clone(), instances),
    }
}

fn gold_labels(instances: &[Instance]) -> Result<BTreeMap<String, Label>, PipelineError> {
    instances
        .iter()
        .map(|i| match i.label {
            Label::Unlabeled => Err(PipelineError::Data(format!("instance {} has no gold label", i.instance_id))),
            label => Ok((i.instance_id.clone(), label)),
        })
        .collect()
}

fn encode_all(model: &SavedModel, instances: &[Instance]) -> Result<Vec<(String, EncodedInstance)>, PipelineError> {
    instances
        .iter()
        .map(|i| Ok((i.instance_id.clone(), encode(i, &model.specs, &model.vocabularies)?)))
        .collect()
}

fn examples(model: &SavedModel, instances: &[Instance]) -> Result<Vec<Example>, PipelineError> {
    gold_labels(instances)?;
    instances
        .iter()
        .map(|i| {
            Ok(Example {
                encoded: encode(i, &model.specs, &model.vocabularies)?,
                positive: i.label.is_positive(),
            })
        })
        .collect()
}

/// Fits a model on `instances`, holding out `dev_fraction` of the sentence
/// groups for epoch selection.
pub fn train_model(
    config: &RunConfig,
    instances: Vec<Instance>,
    vectors: Option<&WordVectors>,
) -> Result<(SavedModel, History), PipelineError> {
    let (fit, dev) = if config.dev_fraction > 0.0 {
        split_dataset(instances, |i| i.sentence_id.as_str(), 1.0 - config.dev_fraction, config.train.seed)
    } else {
        (instances, Vec::new())
    };
    let kinds: Vec<(ChannelKind, usize)> = config.channel_kinds().into_iter().map(|k| (k, config.max_len(k))).collect();
    let pretrained = vectors.map(|v| v.words.as_slice()).unwrap_or_default();
    let vocabularies = build_vocabularies(&fit, &kinds, pretrained);
    let specs: Vec<ChannelSpec> = kinds
        .iter()
        .zip(&vocabularies)
        .map(|(&(name, max_len), vocab)| ChannelSpec {
            name,
            vocab_size: vocab.len(),
            embed_dim: config.embed_dim(name),
            hidden_dim: config.dims.hidden,
            max_len,
        })
        .collect();
    let mut params = init_params(&specs, &config.train)?;
    if let Some(v) = vectors {
        if let Some(i) = specs.iter().position(|s| s.name == ChannelKind::Words) {
            params.channels[i].embedding = pretrained_embedding(&vocabularies[i], &v.vectors, v.dim, config.train.seed)?;
        }
    }
    let mut model = SavedModel {
        specs,
        vocabularies,
        params,
    };
    let fit = examples(&model, &fit)?;
    let dev = examples(&model, &dev)?;
    let (params, history) = train(model.params.clone(), &fit, &dev, &config.train)?;
    model.params = params;
    Ok((model, history))
}

fn load_vectors(config: &RunConfig) -> Result<Option<WordVectors>, PipelineError> {
    match &config.vectors {
        Some(path) if config.channels.words => parse_word_vectors(&read(path)?, config.dims.word_embed)
            .map(Some)
            .map_err(|e| PipelineError::format(path)(FormatError::Model(e))),
        _ => Ok(None),
    }
}

/// Writes the model to `out` and the epoch history to `out.history.tsv`.
pub fn cmd_train(config: &RunConfig, input: &Path, out: &Path) -> Result<History, PipelineError> {
    let (fit, _) = split_sides(config, read_instances(input)?);
    let vectors = load_vectors(config)?;
    let (model, history) = train_model(config, fit, vectors.as_ref())?;
    write(out, &model.to_json())?;
    write(&sibling(out, ".history.tsv"), &history_report(&history))?;
    Ok(history)
}

pub fn load_model(path: &Path) -> Result<SavedModel, PipelineError> {
    SavedModel::from_json(&read(path)?).map_err(PipelineError::format(path))
}

/// Scores `model` on labeled `instances` at threshold 0.5.
pub fn evaluate_model(model: &SavedModel, instances: &[Instance]) -> Result<Metrics, PipelineError> {
    let gold = gold_labels(instances)?;
    let predictions = predict(&model.params, &encode_all(model, instances)?, 0.5)?;
    Ok(compute_metrics(&predictions, &gold)?)
}

/// Returns the metrics report; it is also written to `out` when given.
pub fn cmd_evaluate(config: &RunConfig, model: &Path, input: &Path, out: Option<&Path>) -> Result<String, PipelineError> {
    let model = load_model(model)?;
    let (_, test) = split_sides(config, read_instances(input)?);
    let metrics = evaluate_model(&model, &test)?;
    let label = RunConfig::configuration_label(config.corpus, model.specs.iter().map(|s| s.name));
    let report = metrics_report([(label.as_str(), &metrics)]);
    if let Some(out) = out {
        write(out, &report)?;
    }
    Ok(report)
}

/// Predictions for every instance of `input`, written as JSON lines.
pub fn cmd_predict(model: &Path, input: &Path, out: &Path, threshold: f64) -> Result<Vec<Prediction>, PipelineError> {
    if !threshold.is_finite() {
        return Err(PipelineError::Config(format!("threshold {threshold} is not a finite number")));
    }
    let model = load_model(model)?;
    let instances = read_instances(input)?;
    let predictions = predict(&model.params, &encode_all(&model, &instances)?, threshold)?;
    write(out, &jsonl::to_jsonl(&predictions))?;
    Ok(predictions)
}
