//! Small tab-separated lookup tables: the supersense lexicon and
//! identifier cross-references.

use std::collections::BTreeMap;

use biont_core::instance::{InstanceError, SupersenseLexicon};

use crate::error::FormatError;

/// `#classes: c1,c2,...` on the first non-empty line, then `lemma TAB class`.
pub fn parse_lexicon(text: &str) -> Result<SupersenseLexicon, FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let classes: Vec<String> = match lines.next() {
        Some((_, first)) if first.trim_start().starts_with("#classes:") => first
            .trim_start()
            .trim_start_matches("#classes:")
            .split(',')
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect(),
        Some((i, _)) => {
            return Err(FormatError::MalformedLine {
                line: i + 1,
                reason: "lexicon must start with a `#classes:` header".into(),
            })
        }
        None => Vec::new(),
    };
    let mut entries = Vec::new();
    for (i, line) in lines {
        if line.starts_with('#') {
            continue;
        }
        let Some((lemma, class)) = line.split_once('\t') else {
            return Err(FormatError::MalformedLine {
                line: i + 1,
                reason: "expected `lemma TAB class`".into(),
            });
        };
        let (lemma, class) = (lemma.trim().to_string(), class.trim().to_string());
        if !classes.contains(&class) {
            return Err(FormatError::Instance {
                line: i + 1,
                source: InstanceError::UndeclaredClass { lemma, class },
            });
        }
        entries.push((lemma, class));
    }
    SupersenseLexicon::new(classes, entries).map_err(|source| FormatError::Instance { line: 0, source })
}

/// Two-column `source TAB target` map. `#` lines are comments; a repeated
/// source keeps its first target.
pub fn parse_xrefs(text: &str) -> Result<BTreeMap<String, String>, FormatError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 || cols.iter().any(|c| c.trim().is_empty()) {
            return Err(FormatError::MalformedLine {
                line: i + 1,
                reason: "expected `source TAB target`".into(),
            });
        }
        out.entry(cols[0].trim().to_string())
            .or_insert_with(|| cols[1].trim().to_string());
    }
    Ok(out)
}
