//! PubTator reader for BC5CDR-style chemical-disease documents.
//!
//! Documents are separated by blank lines. `PMID|t|title` and
//! `PMID|a|abstract` give the text, which is the title, one space and the
//! abstract. Mention lines are `PMID TAB start TAB end TAB surface TAB type
//! TAB id [TAB ...]` with offsets into that text; relation lines are
//! `PMID TAB CID TAB chemical TAB disease`. Relation lines with any other
//! tag are counted under `UnknownRelationTag` and dropped. Lines starting
//! with `#` are comments.

use biont_core::corpus::{
    segment_sentences, project_document_relations, Corpus, Diagnostics, DocumentMention, EntityType, GoldRelation, Label,
    PubtatorDocument, RelationLevel,
};

use crate::error::FormatError;
use crate::OffsetPolicy;

/// Parsed documents in input order plus the counters raised on the way.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PubtatorParse {
    pub documents: Vec<PubtatorDocument>,
    pub diagnostics: Diagnostics,
}

#[derive(Default)]
struct Block {
    first_line: usize,
    pmid: Option<String>,
    title: Option<String>,
    abstract_text: Option<String>,
    mentions: Vec<(usize, DocumentMention)>,
    relations: Vec<GoldRelation>,
}

impl Block {
    fn claim(&mut self, pmid: &str, line: usize) -> Result<(), FormatError> {
        match &self.pmid {
            Some(p) if p != pmid => Err(FormatError::MalformedLine {
                line,
                reason: format!("PMID {pmid} inside the block of document {p}"),
            }),
            Some(_) => Ok(()),
            None => {
                self.pmid = Some(pmid.to_string());
                Ok(())
            }
        }
    }

    fn finish(self, policy: OffsetPolicy, out: &mut PubtatorParse) -> Result<(), FormatError> {
        let (Some(pmid), Some(title)) = (self.pmid, self.title) else {
            return Err(FormatError::MalformedLine {
                line: self.first_line,
                reason: "document without a title line".into(),
            });
        };
        let text = match self.abstract_text {
            Some(a) => format!("{title} {a}"),
            None => title,
        };
        let mut mentions = Vec::with_capacity(self.mentions.len());
        for (line, m) in self.mentions {
            match biont_core::corpus::check_span(&m.kb_id, &text, m.char_start, m.char_end, &m.surface) {
                Ok(()) => mentions.push(m),
                Err(source) if policy == OffsetPolicy::Reject => return Err(FormatError::Corpus { line, source }),
                Err(_) => out.diagnostics.bump("DroppedMention"),
            }
        }
        out.documents.push(PubtatorDocument {
            pmid,
            text,
            mentions,
            relations: self.relations,
        });
        Ok(())
    }
}

pub fn parse_pubtator(text: &str, policy: OffsetPolicy) -> Result<PubtatorParse, FormatError> {
    let mut out = PubtatorParse::default();
    let mut block: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            if let Some(b) = block.take() {
                b.finish(policy, &mut out)?;
            }
            continue;
        }
        if raw.starts_with('#') {
            continue;
        }
        let b = block.get_or_insert_with(|| Block {
            first_line: line,
            ..Block::default()
        });
        if let Some((pmid, rest)) = raw.split_once('|') {
            if !pmid.contains('\t') {
                let (tag, content) = rest.split_once('|').ok_or_else(|| FormatError::MalformedLine {
                    line,
                    reason: "expected PMID|t|text or PMID|a|text".into(),
                })?;
                b.claim(pmid, line)?;
                match tag {
                    "t" => b.title = Some(content.to_string()),
                    "a" => b.abstract_text = Some(content.to_string()),
                    other => {
                        return Err(FormatError::MalformedLine {
                            line,
                            reason: format!("unknown text tag {other:?}"),
                        })
                    }
                }
                continue;
            }
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        b.claim(cols[0], line)?;
        let is_mention = cols.len() >= 6 && cols[1].parse::<usize>().is_ok();
        if is_mention {
            let offset = |s: &str| {
                s.parse::<usize>().map_err(|_| FormatError::MalformedLine {
                    line,
                    reason: format!("offset {s:?} is not a non-negative integer"),
                })
            };
            let entity_type: EntityType = cols[4].parse().map_err(|source| FormatError::Corpus { line, source })?;
            b.mentions.push((
                line,
                DocumentMention {
                    char_start: offset(cols[1])?,
                    char_end: offset(cols[2])?,
                    surface: cols[3].to_string(),
                    entity_type,
                    kb_id: cols[5].trim().to_string(),
                },
            ));
        } else if cols.len() == 4 {
            if cols[1] == "CID" {
                b.relations.push(GoldRelation {
                    doc_id: cols[0].to_string(),
                    e1_kb_id: cols[2].trim().to_string(),
                    e2_kb_id: cols[3].trim().to_string(),
                    level: RelationLevel::Document,
                    sentence_id: None,
                    e1_mention: None,
                    e2_mention: None,
                    label: Label::Positive,
                });
            } else {
                out.diagnostics.bump("UnknownRelationTag");
            }
        } else {
            return Err(FormatError::MalformedLine {
                line,
                reason: "neither a text, mention nor relation line".into(),
            });
        }
    }
    if let Some(b) = block {
        b.finish(policy, &mut out)?;
    }
    Ok(out)
}

/// Segments every document into sentences and projects its CID relations
/// onto co-sentential mention pairs.
pub fn project_corpus(parse: PubtatorParse) -> Corpus {
    let mut corpus = Corpus {
        diagnostics: parse.diagnostics,
        ..Corpus::default()
    };
    for doc in &parse.documents {
        let mention_spans: Vec<(usize, usize)> = doc.mentions.iter().map(|m| (m.char_start, m.char_end)).collect();
        let spans = segment_sentences(&doc.text, &mention_spans);
        let projection = project_document_relations(doc, &spans);
        if projection.unassigned_mentions > 0 {
            corpus.diagnostics.add("UnassignedMention", projection.unassigned_mentions);
        }
        corpus.sentences.extend(projection.sentences);
        corpus.relations.extend(projection.relations);
    }
    corpus
}

#[cfg(test)]
mod tests {
    use super::*;
    use biont_core::corpus::CorpusError;

    const DOC: &str = "1|t|Lithium causes tremor.\n1|a|It was mild.\n1\t0\t7\tLithium\tChemical\tD008094\n1\t15\t21\ttremor\tDisease\tD014202\n1\tCID\tD008094\tD014202\n";

    #[test]
    fn one_document() {
        let parse = parse_pubtator(DOC, OffsetPolicy::Reject).unwrap();
        assert_eq!(parse.documents.len(), 1);
        let d = &parse.documents[0];
        assert_eq!(d.text, "Lithium causes tremor. It was mild.");
        assert_eq!(d.mentions.len(), 2);
        assert_eq!(d.relations.len(), 1);
        assert_eq!(d.relations[0].level, RelationLevel::Document);
        assert_eq!(d.relations[0].e1_kb_id, "D008094");
    }

    #[test]
    fn blank_lines_separate_documents_and_other_tags_are_counted() {
        let second = "2|t|Aspirin.\n2|a|Fine.\n2\t0\t7\tAspirin\tChemical\tD001241\n2\tCPR\tD001241\tD000001\n";
        let text = format!("# two documents\n{DOC}\n{second}\n\n");
        let parse = parse_pubtator(&text, OffsetPolicy::Reject).unwrap();
        assert_eq!(parse.documents.len(), 2);
        assert_eq!(parse.documents[1].pmid, "2");
        assert!(parse.documents[1].relations.is_empty());
        assert_eq!(parse.diagnostics.get("UnknownRelationTag"), 1);
    }

    #[test]
    fn offset_mismatch() {
        let bad = DOC.replace("1\t15\t21\ttremor", "1\t14\t20\ttremor");
        match parse_pubtator(&bad, OffsetPolicy::Reject) {
            Err(FormatError::Corpus {
                line: 4,
                source: CorpusError::OffsetMismatch { .. },
            }) => {}
            other => panic!("{other:?}"),
        }
        let parse = parse_pubtator(&bad, OffsetPolicy::Skip).unwrap();
        assert_eq!(parse.documents[0].mentions.len(), 1);
        assert_eq!(parse.diagnostics.get("DroppedMention"), 1);
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            parse_pubtator("1\t0\t1\tx\tChemical\tD1\n", OffsetPolicy::Reject),
            Err(FormatError::MalformedLine { line: 1, .. })
        ));
        let mixed = DOC.replace("1|a|", "2|a|");
        assert!(matches!(
            parse_pubtator(&mixed, OffsetPolicy::Reject),
            Err(FormatError::MalformedLine { line: 2, .. })
        ));
        let gene = DOC.replace("Chemical", "Species");
        assert!(matches!(parse_pubtator(&gene, OffsetPolicy::Reject), Err(FormatError::Corpus { line: 3, .. })));
    }

    #[test]
    fn projection_over_parsed_documents() {
        let corpus = project_corpus(parse_pubtator(DOC, OffsetPolicy::Reject).unwrap());
        assert_eq!(corpus.sentences.len(), 2);
        assert_eq!(corpus.relations.len(), 1);
        assert_eq!(corpus.relations[0].sentence_id.as_deref(), Some("1.s0"));
        assert_eq!(corpus.relations[0].label, Label::Positive);
    }
}
