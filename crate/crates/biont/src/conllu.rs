//! CoNLL-U dependency parse reader.
//!
//! Sentences are blank-line separated blocks of ten-column token lines.
//! Multiword-token (`1-2`) and empty-node (`1.1`) lines are skipped. Token
//! offsets come from `start=` and `end=` in the MISC column when both are
//! present; otherwise the form is searched left to right in the sentence
//! text from the end of the previous token.

use std::collections::BTreeMap;

use biont_core::corpus::{Diagnostics, SentenceRecord};
use biont_core::instance::{align_tokens, validate_parse, InstanceError, ParsedToken};
use biont_core::text::byte_index;

use crate::error::FormatError;

/// One token line before alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConlluRow {
    pub line: usize,
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub head: usize,
    pub deprel: String,
    pub offsets: Option<(usize, usize)>,
}

/// One sentence block with its `# sent_id` comment, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConlluBlock {
    pub first_line: usize,
    pub sent_id: Option<String>,
    pub rows: Vec<ConlluRow>,
}

fn misc_offsets(misc: &str) -> Option<(usize, usize)> {
    let mut start = None;
    let mut end = None;
    for item in misc.split('|') {
        if let Some(v) = item.strip_prefix("start=") {
            start = v.parse().ok();
        } else if let Some(v) = item.strip_prefix("end=") {
            end = v.parse().ok();
        }
    }
    Some((start?, end?))
}

fn parse_row(line: usize, raw: &str) -> Result<Option<ConlluRow>, FormatError> {
    let malformed = |reason: String| FormatError::MalformedConllu { line, reason };
    let cols: Vec<&str> = raw.split('\t').collect();
    if cols.len() != 10 {
        return Err(malformed(format!("expected 10 columns, found {}", cols.len())));
    }
    if cols[0].contains('-') || cols[0].contains('.') {
        return Ok(None);
    }
    let index = cols[0]
        .parse()
        .map_err(|_| malformed(format!("token id {:?} is not an integer", cols[0])))?;
    let head = cols[6]
        .parse()
        .map_err(|_| malformed(format!("head {:?} is not an integer", cols[6])))?;
    Ok(Some(ConlluRow {
        line,
        index,
        form: cols[1].to_string(),
        lemma: cols[2].to_string(),
        head,
        deprel: cols[7].to_string(),
        offsets: misc_offsets(cols[9]),
    }))
}

/// Splits a CoNLL-U stream into sentence blocks.
pub fn parse_conllu_blocks(text: &str) -> Result<Vec<ConlluBlock>, FormatError> {
    let mut blocks = Vec::new();
    let mut current: Option<ConlluBlock> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            blocks.extend(current.take());
            continue;
        }
        let block = current.get_or_insert_with(|| ConlluBlock {
            first_line: line,
            sent_id: None,
            rows: Vec::new(),
        });
        if let Some(comment) = raw.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    block.sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }
        block.rows.extend(parse_row(line, raw)?);
    }
    blocks.extend(current);
    Ok(blocks)
}

/// Tokens of one block anchored in `sentence_text`, with a validated tree.
pub fn align_block(block: &ConlluBlock, sentence_text: &str) -> Result<Vec<ParsedToken>, FormatError> {
    let mut tokens = Vec::with_capacity(block.rows.len());
    let mut cursor = 0;
    for row in &block.rows {
        let instance_error = |source| FormatError::Instance { line: row.line, source };
        let (start, end) = match row.offsets {
            Some(span) => span,
            None => {
                let from = byte_index(sentence_text, cursor).unwrap_or(sentence_text.len());
                let found = align_tokens(&[row.form.as_str()], &sentence_text[from..]).map_err(|_| {
                    instance_error(InstanceError::TokenAlignmentFailure {
                        index: row.index,
                        form: row.form.clone(),
                        cursor,
                    })
                })?;
                (cursor + found[0].0, cursor + found[0].1)
            }
        };
        cursor = end;
        tokens.push(ParsedToken {
            index: row.index,
            form: row.form.clone(),
            lemma: row.lemma.clone(),
            head: row.head,
            deprel: row.deprel.clone(),
            char_start: start,
            char_end: end,
        });
    }
    validate_parse(&tokens).map_err(|source| FormatError::Instance {
        line: block.first_line,
        source,
    })?;
    Ok(tokens)
}

/// Reads a single-sentence CoNLL-U stream against its sentence text.
pub fn load_conllu(text: &str, sentence_text: &str) -> Result<Vec<ParsedToken>, FormatError> {
    let blocks = parse_conllu_blocks(text)?;
    match blocks.as_slice() {
        [block] => align_block(block, sentence_text),
        _ => Err(FormatError::MalformedConllu {
            line: 1,
            reason: format!("expected one sentence, found {}", blocks.len()),
        }),
    }
}

/// Parses of the corpus sentences keyed by sentence id.
///
/// Blocks are matched to sentences through `# sent_id`. Blocks for unknown
/// sentences are counted under `UnusedParse`, trees with several roots
/// under `MultipleRoots`.
pub fn load_parses(
    text: &str,
    sentences: &[SentenceRecord],
) -> Result<(BTreeMap<String, Vec<ParsedToken>>, Diagnostics), FormatError> {
    let by_id: BTreeMap<&str, &SentenceRecord> = sentences.iter().map(|s| (s.sentence_id.as_str(), s)).collect();
    let mut parses = BTreeMap::new();
    let mut diagnostics = Diagnostics::default();
    for block in parse_conllu_blocks(text)? {
        let Some(sent_id) = &block.sent_id else {
            return Err(FormatError::MalformedConllu {
                line: block.first_line,
                reason: "sentence without `# sent_id`".into(),
            });
        };
        let Some(sentence) = by_id.get(sent_id.as_str()) else {
            diagnostics.bump("UnusedParse");
            continue;
        };
        let tokens = align_block(&block, &sentence.text)?;
        if tokens.iter().filter(|t| t.head == 0).count() > 1 {
            diagnostics.bump("MultipleRoots");
        }
        if parses.insert(sent_id.clone(), tokens).is_some() {
            return Err(FormatError::MalformedConllu {
                line: block.first_line,
                reason: format!("second parse for sentence {sent_id}"),
            });
        }
    }
    Ok((parses, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: usize, form: &str, head: usize, misc: &str) -> String {
        format!("{i}\t{form}\t{}\t_\t_\t_\t{head}\tdep\t_\t{misc}", form.to_lowercase())
    }

    #[test]
    fn explicit_offsets_are_transcribed() {
        let text = [
            row(1, "A", 2, "start=0|end=1"),
            row(2, "b", 0, "start=2|end=3"),
            row(3, "c", 2, "SpaceAfter=No|start=4|end=5"),
        ]
        .join("\n");
        let tokens = load_conllu(&text, "A b c").unwrap();
        let spans: Vec<(usize, usize)> = tokens.iter().map(|t| (t.char_start, t.char_end)).collect();
        assert_eq!(spans, [(0, 1), (2, 3), (4, 5)]);
        assert_eq!(tokens[0].lemma, "a");
        assert_eq!(tokens[0].head, 2);
    }

    #[test]
    fn greedy_alignment_without_offsets() {
        let text = [row(1, "A", 2, "_"), row(2, "b", 0, "_"), row(3, "c", 2, "_")].join("\n");
        let tokens = load_conllu(&text, "A b c").unwrap();
        let spans: Vec<(usize, usize)> = tokens.iter().map(|t| (t.char_start, t.char_end)).collect();
        assert_eq!(spans, [(0, 1), (2, 3), (4, 5)]);

        let accented = [row(1, "é", 2, "_"), row(2, "b", 0, "_")].join("\n");
        let tokens = load_conllu(&accented, "é b").unwrap();
        assert_eq!((tokens[1].char_start, tokens[1].char_end), (2, 3));
    }

    #[test]
    fn missing_form_fails_alignment() {
        let text = [row(1, "A", 0, "_"), row(2, "z", 1, "_")].join("\n");
        match load_conllu(&text, "A b") {
            Err(FormatError::Instance {
                line: 2,
                source: InstanceError::TokenAlignmentFailure { index: 2, cursor: 1, .. },
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multiword_and_empty_nodes_are_skipped() {
        let text = format!(
            "# sent_id = s1\n# text = A b\n1-2\tAb\t_\t_\t_\t_\t_\t_\t_\t_\n{}\n1.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n{}\n",
            row(1, "A", 2, "_"),
            row(2, "b", 0, "_")
        );
        let blocks = parse_conllu_blocks(&text).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].sent_id.as_deref(), Some("s1"));
        assert_eq!(blocks[0].rows.len(), 2);
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse_conllu_blocks("1\tA\ta\n"),
            Err(FormatError::MalformedConllu { line: 1, .. })
        ));
        let bad_head = row(1, "A", 0, "_").replace("\t0\tdep", "\t_\tdep");
        assert!(matches!(parse_conllu_blocks(&bad_head), Err(FormatError::MalformedConllu { .. })));
        let out_of_range = row(1, "A", 5, "_");
        assert!(matches!(
            load_conllu(&out_of_range, "A"),
            Err(FormatError::Instance {
                source: InstanceError::InvalidHead { .. },
                ..
            })
        ));
    }

    #[test]
    fn parses_are_keyed_by_sentence_id() {
        let sentence = |id: &str, text: &str| SentenceRecord {
            sentence_id: id.into(),
            doc_id: "d".into(),
            text: text.into(),
            entities: vec![],
        };
        let text = format!(
            "# sent_id = s1\n{}\n{}\n\n# sent_id = s9\n{}\n\n# sent_id = s2\n{}\n{}\n",
            row(1, "A", 0, "_"),
            row(2, "b", 0, "_"),
            row(1, "Q", 0, "_"),
            row(1, "C", 0, "_"),
            row(2, "d", 1, "_"),
        );
        let (parses, diagnostics) = load_parses(&text, &[sentence("s1", "A b"), sentence("s2", "C d")]).unwrap();
        assert_eq!(parses.keys().collect::<Vec<_>>(), ["s1", "s2"]);
        assert_eq!(diagnostics.get("UnusedParse"), 1);
        assert_eq!(diagnostics.get("MultipleRoots"), 1);
        let no_id = row(1, "A", 0, "_");
        assert!(load_parses(&no_id, &[]).is_err());
    }
}
