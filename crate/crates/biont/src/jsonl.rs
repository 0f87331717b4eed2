//! JSON-lines dumps: one compact JSON object per LF-terminated line.

use biont_core::corpus::{Corpus, CorpusRecord};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::FormatError;

pub fn to_jsonl<'a, T: Serialize + 'a>(items: impl IntoIterator<Item = &'a T>) -> String {
    let mut out = String::new();
    for item in items {
        // plain data records with string keys always serialize
        out.push_str(&serde_json::to_string(item).expect("record serializes to JSON"));
        out.push('\n');
    }
    out
}

/// Parses every non-blank line as one `T`.
pub fn from_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| FormatError::Json { line: i + 1, source }))
        .collect()
}

/// Sentences first, then relations, each line tagged with `kind`.
pub fn corpus_to_jsonl(corpus: &Corpus) -> String {
    let records: Vec<CorpusRecord> = corpus.records().collect();
    to_jsonl(&records)
}

/// Inverse of [`corpus_to_jsonl`]; diagnostics are not part of the dump.
pub fn corpus_from_jsonl(text: &str) -> Result<Corpus, FormatError> {
    Ok(Corpus::from_records(from_jsonl::<CorpusRecord>(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use biont_core::corpus::{EntityMention, EntityType, GoldRelation, Label, RelationLevel, SentenceRecord};

    #[test]
    fn corpus_round_trip() {
        let corpus = Corpus {
            sentences: vec![SentenceRecord {
                sentence_id: "s".into(),
                doc_id: "d".into(),
                text: "A \"b\"".into(),
                entities: vec![EntityMention {
                    mention_id: "s.e0".into(),
                    sentence_id: "s".into(),
                    char_start: 0,
                    char_end: 1,
                    surface: "A".into(),
                    entity_type: EntityType::Drug,
                    kb_id: "a".into(),
                    discontinuous: true,
                }],
            }],
            relations: vec![GoldRelation {
                doc_id: "d".into(),
                e1_kb_id: "a".into(),
                e2_kb_id: "b".into(),
                level: RelationLevel::Document,
                sentence_id: None,
                e1_mention: None,
                e2_mention: None,
                label: Label::Positive,
            }],
            diagnostics: Default::default(),
        };
        let text = corpus_to_jsonl(&corpus);
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().next().unwrap().starts_with("{\"kind\":\"sentence\""));
        assert_eq!(corpus_from_jsonl(&text).unwrap(), corpus);
        assert_eq!(corpus_to_jsonl(&corpus_from_jsonl(&text).unwrap()), text);
    }

    #[test]
    fn bad_line_reports_its_number() {
        let err = from_jsonl::<CorpusRecord>("\n{\"kind\":\"nope\"}\n").unwrap_err();
        assert!(matches!(err, FormatError::Json { line: 2, .. }));
    }
}
