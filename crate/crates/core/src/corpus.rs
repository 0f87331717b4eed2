//! Uniform corpus model shared by all corpus readers.
//!
//! Offsets are character offsets with exclusive ends. Document-level
//! annotations (PubTator) are turned into sentence-level ones by
//! [`segment_sentences`] followed by [`project_document_relations`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{char_len, char_slice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityType {
    Drug,
    Gene,
    Phenotype,
    Disease,
    Chemical,
}

impl EntityType {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Drug => "drug",
            EntityType::Gene => "gene",
            EntityType::Phenotype => "phenotype",
            EntityType::Disease => "disease",
            EntityType::Chemical => "chemical",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "drug" => Ok(EntityType::Drug),
            "gene" => Ok(EntityType::Gene),
            "phenotype" => Ok(EntityType::Phenotype),
            "disease" => Ok(EntityType::Disease),
            "chemical" => Ok(EntityType::Chemical),
            _ => Err(CorpusError::UnknownEntityType(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
    Unlabeled,
}

impl Label {
    pub fn from_flag(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationLevel {
    Sentence,
    Document,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("mention {mention}: surface {surface:?} does not match text {found:?} at {start}..{end}")]
    OffsetMismatch {
        mention: String,
        surface: String,
        found: String,
        start: usize,
        end: usize,
    },
    #[error("unknown entity type {0:?}")]
    UnknownEntityType(String),
    #[error("relation {0}: document-level relations carry no sentence id")]
    InvalidRelation(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub mention_id: String,
    pub sentence_id: String,
    pub char_start: usize,
    pub char_end: usize,
    pub surface: String,
    pub entity_type: EntityType,
    pub kb_id: String,
    /// Set when the source mention had several spans and only the first was kept.
    #[serde(default)]
    pub discontinuous: bool,
}

impl EntityMention {
    /// Checks `0 <= start < end <= len(text)` and that the surface matches.
    pub fn validate(&self, text: &str) -> Result<(), CorpusError> {
        check_span(&self.mention_id, text, self.char_start, self.char_end, &self.surface)
    }

    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.char_start < end && start < self.char_end
    }
}

/// Checks `0 <= start < end <= len(text)` and that `surface` is the text there.
pub fn check_span(id: &str, text: &str, start: usize, end: usize, surface: &str) -> Result<(), CorpusError> {
    let found = if start < end && end <= char_len(text) {
        char_slice(text, start, end)
    } else {
        None
    };
    match found {
        Some(found) if found == surface => Ok(()),
        other => Err(CorpusError::OffsetMismatch {
            mention: id.to_string(),
            surface: surface.to_string(),
            found: other.unwrap_or_default().to_string(),
            start,
            end,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub sentence_id: String,
    pub doc_id: String,
    pub text: String,
    pub entities: Vec<EntityMention>,
}

impl SentenceRecord {
    pub fn mention(&self, mention_id: &str) -> Option<&EntityMention> {
        self.entities.iter().find(|m| m.mention_id == mention_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRelation {
    pub doc_id: String,
    pub e1_kb_id: String,
    pub e2_kb_id: String,
    pub level: RelationLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_id: Option<String>,
    /// Mention ids of the pair, present on sentence-level relations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e1_mention: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2_mention: Option<String>,
    pub label: Label,
}

impl GoldRelation {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let ok = match self.level {
            RelationLevel::Document => self.sentence_id.is_none(),
            RelationLevel::Sentence => {
                self.sentence_id.is_some() && self.e1_mention.is_some() && self.e2_mention.is_some()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(CorpusError::InvalidRelation(format!(
                "{}:{}-{}",
                self.doc_id, self.e1_kb_id, self.e2_kb_id
            )))
        }
    }
}

/// One line of the internal JSON-lines corpus dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CorpusRecord {
    Sentence(SentenceRecord),
    Relation(GoldRelation),
}

/// Sentences plus sentence-level gold relations, in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<SentenceRecord>,
    pub relations: Vec<GoldRelation>,
    pub diagnostics: Diagnostics,
}

impl Corpus {
    pub fn records(&self) -> impl Iterator<Item = CorpusRecord> + '_ {
        self.sentences
            .iter()
            .cloned()
            .map(CorpusRecord::Sentence)
            .chain(self.relations.iter().cloned().map(CorpusRecord::Relation))
    }

    pub fn from_records(records: impl IntoIterator<Item = CorpusRecord>) -> Self {
        let mut corpus = Corpus::default();
        for record in records {
            match record {
                CorpusRecord::Sentence(s) => corpus.sentences.push(s),
                CorpusRecord::Relation(r) => corpus.relations.push(r),
            }
        }
        corpus
    }

    pub fn extend(&mut self, other: Corpus) {
        self.sentences.extend(other.sentences);
        self.relations.extend(other.relations);
        self.diagnostics.merge(other.diagnostics);
    }
}

/// Named counters for skipped or flagged items.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Diagnostics(BTreeMap<String, usize>);

impl Diagnostics {
    pub fn bump(&mut self, reason: &str) {
        *self.0.entry(reason.to_string()).or_default() += 1;
    }

    pub fn add(&mut self, reason: &str, n: usize) {
        *self.0.entry(reason.to_string()).or_default() += n;
    }

    pub fn get(&self, reason: &str) -> usize {
        self.0.get(reason).copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: Diagnostics) {
        for (reason, n) in other.0 {
            *self.0.entry(reason).or_default() += n;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }
}

/// A mention anchored in a whole document (title + " " + abstract).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentMention {
    pub char_start: usize,
    pub char_end: usize,
    pub surface: String,
    pub entity_type: EntityType,
    pub kb_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PubtatorDocument {
    pub pmid: String,
    pub text: String,
    pub mentions: Vec<DocumentMention>,
    /// Document-level CID relations: e1 is the chemical, e2 the disease.
    pub relations: Vec<GoldRelation>,
}

/// Splits `text` into sentence spans `[start, end)` in characters.
///
/// A boundary follows '.', '!' or '?' when whitespace and then an uppercase
/// letter or a digit come next. A boundary that would cut through one of
/// `mentions` is dropped, so the sentence runs on past the mention.
pub fn segment_sentences(text: &str, mentions: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut spans = Vec::new();
    let Some(mut start) = chars.iter().position(|c| !c.is_whitespace()) else {
        return spans;
    };
    for p in start..n {
        if !matches!(chars[p], '.' | '!' | '?') {
            continue;
        }
        let boundary = p + 1;
        let mut next = boundary;
        while next < n && chars[next].is_whitespace() {
            next += 1;
        }
        if next == boundary || next == n {
            continue;
        }
        if !(chars[next].is_uppercase() || chars[next].is_ascii_digit()) {
            continue;
        }
        if mentions.iter().any(|&(ms, me)| ms < next && me > boundary) {
            continue;
        }
        spans.push((start, boundary));
        start = next;
    }
    let end = chars.iter().rposition(|c| !c.is_whitespace()).map_or(0, |i| i + 1);
    if start < end {
        spans.push((start, end));
    }
    spans
}

/// Sentence records and labeled pairs derived from one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Projection {
    pub sentences: Vec<SentenceRecord>,
    pub relations: Vec<GoldRelation>,
    /// Mentions not contained in any span.
    pub unassigned_mentions: usize,
}

/// Re-anchors mentions to sentences and labels every co-sentential
/// chemical and disease mention pair.
///
/// A pair is positive when its kb id pair is one of the document's CID
/// relations and negative otherwise. Pairs whose two mentions share a kb id
/// are skipped.
pub fn project_document_relations(doc: &PubtatorDocument, spans: &[(usize, usize)]) -> Projection {
    let cid: BTreeSet<(&str, &str)> = doc
        .relations
        .iter()
        .filter(|r| r.label.is_positive())
        .map(|r| (r.e1_kb_id.as_str(), r.e2_kb_id.as_str()))
        .collect();

    let mut order: Vec<&DocumentMention> = doc.mentions.iter().collect();
    order.sort_by_key(|m| (m.char_start, m.char_end));

    let mut out = Projection::default();
    let mut assigned = 0;
    for (i, &(start, end)) in spans.iter().enumerate() {
        let sentence_id = format!("{}.s{}", doc.pmid, i);
        let text = char_slice(&doc.text, start, end).unwrap_or_default().to_string();
        let entities: Vec<EntityMention> = order
            .iter()
            .filter(|m| m.char_start >= start && m.char_end <= end)
            .enumerate()
            .map(|(k, m)| EntityMention {
                mention_id: format!("{sentence_id}.e{k}"),
                sentence_id: sentence_id.clone(),
                char_start: m.char_start - start,
                char_end: m.char_end - start,
                surface: m.surface.clone(),
                entity_type: m.entity_type,
                kb_id: m.kb_id.clone(),
                discontinuous: false,
            })
            .collect();
        assigned += entities.len();

        let of_type = |t: EntityType| entities.iter().filter(move |m| m.entity_type == t);
        for chemical in of_type(EntityType::Chemical) {
            for disease in of_type(EntityType::Disease) {
                if chemical.kb_id == disease.kb_id {
                    continue;
                }
                let positive = cid.contains(&(chemical.kb_id.as_str(), disease.kb_id.as_str()));
                out.relations.push(GoldRelation {
                    doc_id: doc.pmid.clone(),
                    e1_kb_id: chemical.kb_id.clone(),
                    e2_kb_id: disease.kb_id.clone(),
                    level: RelationLevel::Sentence,
                    sentence_id: Some(sentence_id.clone()),
                    e1_mention: Some(chemical.mention_id.clone()),
                    e2_mention: Some(disease.mention_id.clone()),
                    label: Label::from_flag(positive),
                });
            }
        }
        out.sentences.push(SentenceRecord {
            sentence_id,
            doc_id: doc.pmid.clone(),
            text,
            entities,
        });
    }
    out.unassigned_mentions = doc.mentions.len() - assigned;
    out
}
