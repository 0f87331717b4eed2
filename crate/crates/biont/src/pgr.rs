//! PGR phenotype-gene TSV reader.
//!
//! One row per candidate pair. Column names come from a [`ColumnMap`];
//! offsets are 0-based character offsets with exclusive ends. Rows sharing
//! a sentence id collapse into one sentence, and mentions repeated across
//! those rows collapse into one mention.

use std::collections::BTreeMap;

use biont_core::corpus::{Corpus, EntityMention, EntityType, GoldRelation, Label, RelationLevel, SentenceRecord};
use serde::{Deserialize, Serialize};

use crate::error::FormatError;
use crate::OffsetPolicy;

/// Header names of the PGR columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ColumnMap {
    pub sentence_id: String,
    /// Document column; the sentence id doubles as document id when unset.
    pub doc_id: Option<String>,
    pub text: String,
    pub gene_id: String,
    pub gene_surface: String,
    pub gene_start: String,
    pub gene_end: String,
    pub phenotype_id: String,
    pub phenotype_surface: String,
    pub phenotype_start: String,
    pub phenotype_end: String,
    pub relation: String,
    /// Relation values that mean positive; anything else is negative.
    pub truthy: Vec<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            sentence_id: "sentence_id".into(),
            doc_id: Some("pmid".into()),
            text: "sentence".into(),
            gene_id: "gene_id".into(),
            gene_surface: "gene".into(),
            gene_start: "gene_start".into(),
            gene_end: "gene_end".into(),
            phenotype_id: "phenotype_id".into(),
            phenotype_surface: "phenotype".into(),
            phenotype_start: "phenotype_start".into(),
            phenotype_end: "phenotype_end".into(),
            relation: "relation".into(),
            truthy: vec!["TRUE".into(), "True".into(), "true".into(), "1".into()],
        }
    }
}

struct Columns {
    sentence_id: usize,
    doc_id: Option<usize>,
    text: usize,
    gene: [usize; 4],
    phenotype: [usize; 4],
    relation: usize,
}

impl Columns {
    fn locate(map: &ColumnMap, header: &csv::StringRecord) -> Result<Self, FormatError> {
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| FormatError::MissingColumn(name.to_string()))
        };
        Ok(Columns {
            sentence_id: find(&map.sentence_id)?,
            doc_id: map.doc_id.as_deref().map(find).transpose()?,
            text: find(&map.text)?,
            gene: [
                find(&map.gene_id)?,
                find(&map.gene_surface)?,
                find(&map.gene_start)?,
                find(&map.gene_end)?,
            ],
            phenotype: [
                find(&map.phenotype_id)?,
                find(&map.phenotype_surface)?,
                find(&map.phenotype_start)?,
                find(&map.phenotype_end)?,
            ],
            relation: find(&map.relation)?,
        })
    }
}

struct Pending {
    record: SentenceRecord,
}

impl Pending {
    /// Id of the mention with these coordinates, added when new.
    fn mention(&mut self, entity_type: EntityType, kb_id: &str, surface: &str, start: usize, end: usize) -> String {
        let existing = self.record.entities.iter().find(|m| {
            m.entity_type == entity_type && m.kb_id == kb_id && m.char_start == start && m.char_end == end
        });
        if let Some(m) = existing {
            return m.mention_id.clone();
        }
        let mention_id = format!("{}.e{}", self.record.sentence_id, self.record.entities.len());
        self.record.entities.push(EntityMention {
            mention_id: mention_id.clone(),
            sentence_id: self.record.sentence_id.clone(),
            char_start: start,
            char_end: end,
            surface: surface.to_string(),
            entity_type,
            kb_id: kb_id.to_string(),
            discontinuous: false,
        });
        mention_id
    }
}

/// Parses a PGR TSV file with a header row.
pub fn parse_pgr_tsv(text: &str, map: &ColumnMap, policy: OffsetPolicy) -> Result<Corpus, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| FormatError::MalformedLine {
        line: 1,
        reason: e.to_string(),
    })?;
    let cols = Columns::locate(map, header)?;

    let mut corpus = Corpus::default();
    let mut sentences: Vec<Pending> = Vec::new();
    let mut by_id: BTreeMap<String, usize> = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| FormatError::MalformedLine {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| row.get(i).unwrap_or_default();
        let offset = |i: usize| {
            field(i).trim().parse::<usize>().map_err(|_| FormatError::MalformedLine {
                line,
                reason: format!("offset {:?} is not a non-negative integer", field(i)),
            })
        };

        let sentence_id = field(cols.sentence_id).trim();
        let sentence_text = field(cols.text);
        let slot = match by_id.get(sentence_id) {
            Some(&slot) => {
                if sentences[slot].record.text != sentence_text {
                    return Err(FormatError::MalformedLine {
                        line,
                        reason: format!("sentence {sentence_id} appears with two different texts"),
                    });
                }
                slot
            }
            None => {
                let doc_id = cols.doc_id.map_or(sentence_id, |i| field(i).trim());
                by_id.insert(sentence_id.to_string(), sentences.len());
                sentences.push(Pending {
                    record: SentenceRecord {
                        sentence_id: sentence_id.to_string(),
                        doc_id: doc_id.to_string(),
                        text: sentence_text.to_string(),
                        entities: Vec::new(),
                    },
                });
                sentences.len() - 1
            }
        };

        let mut ids = Vec::with_capacity(2);
        let mut dropped = false;
        for (entity_type, [id_col, surface_col, start_col, end_col]) in
            [(EntityType::Gene, cols.gene), (EntityType::Phenotype, cols.phenotype)]
        {
            let (start, end) = (offset(start_col)?, offset(end_col)?);
            let (kb_id, surface) = (field(id_col).trim(), field(surface_col));
            if let Err(source) = biont_core::corpus::check_span(kb_id, sentence_text, start, end, surface) {
                match policy {
                    OffsetPolicy::Reject => return Err(FormatError::Corpus { line, source }),
                    OffsetPolicy::Skip => {
                        corpus.diagnostics.bump("DroppedMention");
                        dropped = true;
                        continue;
                    }
                }
            }
            ids.push((kb_id.to_string(), sentences[slot].mention(entity_type, kb_id, surface, start, end)));
        }
        if dropped {
            corpus.diagnostics.bump("OffsetMismatch");
            continue;
        }
        let positive = map.truthy.iter().any(|t| t == field(cols.relation).trim());
        let [(gene_kb, gene_mention), (phen_kb, phen_mention)]: [(String, String); 2] =
            ids.try_into().expect("two mentions per row");
        corpus.relations.push(GoldRelation {
            doc_id: sentences[slot].record.doc_id.clone(),
            e1_kb_id: gene_kb,
            e2_kb_id: phen_kb,
            level: RelationLevel::Sentence,
            sentence_id: Some(sentence_id.to_string()),
            e1_mention: Some(gene_mention),
            e2_mention: Some(phen_mention),
            label: Label::from_flag(positive),
        });
    }
    corpus.sentences = sentences.into_iter().map(|p| p.record).collect();
    Ok(corpus)
}
