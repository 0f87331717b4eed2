//! DDI corpus reader (SemEval-2013 Task 9 XML).
//!
//! `document > sentence(id, text) > entity(id, charOffset, type, text)` and
//! `pair(e1, e2, ddi)`. Offsets are inclusive character ranges `a-b`; several
//! `;`-separated ranges mark a discontinuous mention, of which only the
//! first range is kept. Interaction types are collapsed to positive.
//!
//! DDI mentions carry no database identifier, so the lowercased mention
//! text is used as the kb id and translated to ChEBI by cross-reference.

use std::collections::BTreeSet;

use biont_core::corpus::{Corpus, CorpusError, EntityMention, EntityType, GoldRelation, Label, RelationLevel, SentenceRecord};
use biont_core::text::char_slice;
use roxmltree::{Document, Node};

use crate::error::FormatError;
use crate::OffsetPolicy;

fn line_of(doc: &Document<'_>, node: Node<'_, '_>) -> usize {
    doc.text_pos_at(node.range().start).row as usize
}

fn attr<'a>(doc: &Document<'_>, node: Node<'a, '_>, name: &str) -> Result<&'a str, FormatError> {
    node.attribute(name).ok_or_else(|| {
        FormatError::MalformedXml(format!(
            "line {}: <{}> without {name:?}",
            line_of(doc, node),
            node.tag_name().name()
        ))
    })
}

/// First span of a `charOffset` value as an exclusive range, and whether
/// more spans followed.
fn first_span(value: &str) -> Option<(usize, usize, bool)> {
    let mut spans = value.split(';');
    let (a, b) = spans.next()?.trim().split_once('-')?;
    let start: usize = a.trim().parse().ok()?;
    let last: usize = b.trim().parse().ok()?;
    if last < start {
        return None;
    }
    Some((start, last + 1, spans.next().is_some()))
}

fn entity_type(value: &str) -> Result<EntityType, CorpusError> {
    match value {
        "drug" | "drug_n" | "brand" | "group" => Ok(EntityType::Drug),
        other => Err(CorpusError::UnknownEntityType(other.to_string())),
    }
}

/// Parses a DDI XML file. The root may be one `document` or any element
/// wrapping several.
pub fn parse_ddi_xml(text: &str, policy: OffsetPolicy) -> Result<Corpus, FormatError> {
    let doc = Document::parse(text).map_err(|e| FormatError::MalformedXml(e.to_string()))?;
    let mut corpus = Corpus::default();
    for document in doc.descendants().filter(|n| n.has_tag_name("document")) {
        let doc_id = attr(&doc, document, "id")?;
        for sentence in document.children().filter(|n| n.has_tag_name("sentence")) {
            let sentence_id = attr(&doc, sentence, "id")?;
            let sentence_text = attr(&doc, sentence, "text")?;
            let mut entities = Vec::new();
            let mut dropped = BTreeSet::new();
            for entity in sentence.children().filter(|n| n.has_tag_name("entity")) {
                let line = line_of(&doc, entity);
                let id = attr(&doc, entity, "id")?;
                let offsets = attr(&doc, entity, "charOffset")?;
                let written = attr(&doc, entity, "text")?;
                let entity_type =
                    entity_type(attr(&doc, entity, "type")?).map_err(|source| FormatError::Corpus { line, source })?;
                let (char_start, char_end, discontinuous) = first_span(offsets)
                    .ok_or_else(|| FormatError::MalformedXml(format!("line {line}: bad charOffset {offsets:?}")))?;
                // a discontinuous mention's text spans all ranges; the kept range is re-read
                let surface = if discontinuous {
                    char_slice(sentence_text, char_start, char_end).unwrap_or_default()
                } else {
                    written
                };
                let mention = EntityMention {
                    mention_id: id.to_string(),
                    sentence_id: sentence_id.to_string(),
                    char_start,
                    char_end,
                    surface: surface.to_string(),
                    entity_type,
                    kb_id: written.to_lowercase(),
                    discontinuous,
                };
                match (mention.validate(sentence_text), policy) {
                    (Ok(()), _) => {
                        if discontinuous {
                            corpus.diagnostics.bump("DiscontinuousMention");
                        }
                        entities.push(mention);
                    }
                    (Err(source), OffsetPolicy::Reject) => return Err(FormatError::Corpus { line, source }),
                    (Err(_), OffsetPolicy::Skip) => {
                        corpus.diagnostics.bump("DroppedMention");
                        dropped.insert(id);
                    }
                }
            }
            for pair in sentence.children().filter(|n| n.has_tag_name("pair")) {
                let line = line_of(&doc, pair);
                let (e1, e2) = (attr(&doc, pair, "e1")?, attr(&doc, pair, "e2")?);
                if dropped.contains(e1) || dropped.contains(e2) {
                    corpus.diagnostics.bump("OffsetMismatch");
                    continue;
                }
                let find = |id: &str| {
                    entities.iter().find(|m| m.mention_id == id).ok_or_else(|| {
                        FormatError::MalformedXml(format!("line {line}: pair refers to unknown entity {id:?}"))
                    })
                };
                let (m1, m2) = (find(e1)?, find(e2)?);
                let label = match attr(&doc, pair, "ddi")? {
                    "true" => Label::Positive,
                    "false" => Label::Negative,
                    other => {
                        return Err(FormatError::MalformedXml(format!("line {line}: ddi={other:?}")));
                    }
                };
                corpus.relations.push(GoldRelation {
                    doc_id: doc_id.to_string(),
                    e1_kb_id: m1.kb_id.clone(),
                    e2_kb_id: m2.kb_id.clone(),
                    level: RelationLevel::Sentence,
                    sentence_id: Some(sentence_id.to_string()),
                    e1_mention: Some(m1.mention_id.clone()),
                    e2_mention: Some(m2.mention_id.clone()),
                    label,
                });
            }
            corpus.sentences.push(SentenceRecord {
                sentence_id: sentence_id.to_string(),
                doc_id: doc_id.to_string(),
                text: sentence_text.to_string(),
                entities,
            });
        }
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(entities: &str, pairs: &str) -> String {
        format!(
            r#"<?xml version="1.0" encoding="UTF-8"?>
<document id="D1">
  <sentence id="D1.s0" text="Aspirin &amp; warfarin interact.">
    {entities}
    {pairs}
  </sentence>
</document>"#
        )
    }

    const TWO: &str = r#"<entity id="D1.s0.e0" charOffset="0-6" type="drug" text="Aspirin"/>
    <entity id="D1.s0.e1" charOffset="10-17" type="brand" text="warfarin"/>"#;

    #[test]
    fn sentences_entities_and_pairs() {
        let xml = doc(TWO, r#"<pair id="D1.s0.p0" e1="D1.s0.e0" e2="D1.s0.e1" ddi="true" type="effect"/>"#);
        let corpus = parse_ddi_xml(&xml, OffsetPolicy::Reject).unwrap();
        assert_eq!(corpus.sentences.len(), 1);
        let s = &corpus.sentences[0];
        assert_eq!(s.text, "Aspirin & warfarin interact.");
        assert_eq!((s.entities[1].char_start, s.entities[1].char_end), (10, 18));
        assert_eq!(s.entities[0].kb_id, "aspirin");
        assert_eq!(corpus.relations.len(), 1);
        let r = &corpus.relations[0];
        assert_eq!(r.label, Label::Positive);
        assert_eq!(r.sentence_id.as_deref(), Some("D1.s0"));
        assert_eq!(r.e2_mention.as_deref(), Some("D1.s0.e1"));

        let xml = doc(TWO, r#"<pair id="D1.s0.p0" e1="D1.s0.e0" e2="D1.s0.e1" ddi="false"/>"#);
        assert_eq!(parse_ddi_xml(&xml, OffsetPolicy::Reject).unwrap().relations[0].label, Label::Negative);
    }

    #[test]
    fn discontinuous_offsets_keep_the_first_span() {
        assert_eq!(first_span("10-14;20-24"), Some((10, 15, true)));
        assert_eq!(first_span("3-3"), Some((3, 4, false)));
        assert_eq!(first_span("7-2"), None);
        let xml = doc(
            r#"<entity id="D1.s0.e0" charOffset="0-2;10-17" type="drug" text="Asp warfarin"/>"#,
            "",
        );
        let corpus = parse_ddi_xml(&xml, OffsetPolicy::Reject).unwrap();
        let m = &corpus.sentences[0].entities[0];
        assert!(m.discontinuous);
        assert_eq!((m.char_start, m.char_end, m.surface.as_str()), (0, 3, "Asp"));
        assert_eq!(corpus.diagnostics.get("DiscontinuousMention"), 1);
    }

    #[test]
    fn offset_mismatch_rejects_or_skips() {
        let bad = r#"<entity id="D1.s0.e0" charOffset="0-6" type="drug" text="Aspirin"/>
    <entity id="D1.s0.e1" charOffset="11-17" type="drug" text="warfarin"/>"#;
        let xml = doc(bad, r#"<pair id="p" e1="D1.s0.e0" e2="D1.s0.e1" ddi="true"/>"#);
        match parse_ddi_xml(&xml, OffsetPolicy::Reject) {
            Err(FormatError::Corpus {
                line,
                source: CorpusError::OffsetMismatch { .. },
            }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let corpus = parse_ddi_xml(&xml, OffsetPolicy::Skip).unwrap();
        assert_eq!(corpus.sentences[0].entities.len(), 1);
        assert!(corpus.relations.is_empty());
        assert_eq!(corpus.diagnostics.get("OffsetMismatch"), 1);
        assert_eq!(corpus.diagnostics.get("DroppedMention"), 1);
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(
            parse_ddi_xml("<document id='x'><sentence", OffsetPolicy::Reject),
            Err(FormatError::MalformedXml(_))
        ));
        let xml = doc(TWO, r#"<pair id="p" e1="D1.s0.e0" e2="nope" ddi="true"/>"#);
        assert!(matches!(parse_ddi_xml(&xml, OffsetPolicy::Reject), Err(FormatError::MalformedXml(_))));
        let xml = doc(TWO, r#"<pair id="p" e1="D1.s0.e0" e2="D1.s0.e1" ddi="maybe"/>"#);
        assert!(matches!(parse_ddi_xml(&xml, OffsetPolicy::Reject), Err(FormatError::MalformedXml(_))));
        let xml = doc(r#"<entity id="e" charOffset="0-6" type="gene" text="Aspirin"/>"#, "");
        assert!(matches!(parse_ddi_xml(&xml, OffsetPolicy::Reject), Err(FormatError::Corpus { .. })));
    }
}
