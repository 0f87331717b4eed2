//! OBO 1.2 flat-file reader.
//!
//! Only `[Term]` stanzas are read, and within them only the `id`, `name`,
//! `alt_id`, `is_a` and `is_obsolete` tags. Every other tag and stanza type
//! is skipped, so `part_of` and other relationships never enter the graph.

use biont_core::onto::{Namespace, OntologyConcept, OntologyGraph};

use crate::error::FormatError;

struct Draft {
    line: usize,
    id: Option<String>,
    concept: OntologyConcept,
}

/// The identifier part of a tag value: trailing `! comment` and
/// `{qualifier}` blocks removed.
fn clean_id(value: &str, line: usize) -> Result<String, FormatError> {
    let value = value.split('!').next().unwrap_or_default();
    let value = value.split('{').next().unwrap_or_default().trim();
    match value.split_whitespace().next() {
        Some(id) => Ok(id.to_string()),
        None => Err(FormatError::MalformedStanza {
            line,
            reason: "empty identifier".into(),
        }),
    }
}

fn finish(draft: Draft, out: &mut Vec<OntologyConcept>) -> Result<(), FormatError> {
    let Some(id) = draft.id else {
        return Err(FormatError::MalformedStanza {
            line: draft.line,
            reason: "term without id".into(),
        });
    };
    let mut concept = draft.concept;
    concept.id = id;
    out.push(concept);
    Ok(())
}

/// Concepts in stanza order, not yet checked for graph consistency.
pub fn parse_obo_concepts(text: &str) -> Result<Vec<OntologyConcept>, FormatError> {
    let mut out = Vec::new();
    let mut current: Option<Draft> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('!') {
            continue;
        }
        if trimmed.starts_with('[') {
            if let Some(draft) = current.take() {
                finish(draft, &mut out)?;
            }
            if trimmed == "[Term]" {
                current = Some(Draft {
                    line,
                    id: None,
                    concept: OntologyConcept::new(""),
                });
            }
            continue;
        }
        let Some(draft) = current.as_mut() else {
            continue;
        };
        let Some((tag, value)) = trimmed.split_once(':') else {
            return Err(FormatError::MalformedStanza {
                line,
                reason: format!("expected `tag: value`, found {trimmed:?}"),
            });
        };
        let value = value.trim();
        match tag.trim() {
            "id" => {
                if draft.id.is_some() {
                    return Err(FormatError::MalformedStanza {
                        line,
                        reason: "second id in one term".into(),
                    });
                }
                draft.id = Some(clean_id(value, line)?);
            }
            "name" => draft.concept.name = value.to_string(),
            "alt_id" => draft.concept.alt_ids.push(clean_id(value, line)?),
            "is_a" => draft.concept.parents.push(clean_id(value, line)?),
            "is_obsolete" => draft.concept.obsolete = value == "true",
            _ => {}
        }
    }
    if let Some(draft) = current {
        finish(draft, &mut out)?;
    }
    Ok(out)
}

/// Parses and validates one ontology.
pub fn parse_obo(text: &str, namespace: Namespace) -> Result<OntologyGraph, FormatError> {
    Ok(OntologyGraph::new(namespace, parse_obo_concepts(text)?)?)
}
