//! GAF 2.x gene annotation reader.

use biont_core::onto::{is_valid_evidence_code, AnnotationRecord};

use crate::error::FormatError;

/// One record per data line. Lines starting with `!` are comments.
///
/// Columns used (1-based): 2 gene id, 3 gene symbol, 4 qualifier, 5 GO id,
/// 7 evidence code. A `NOT` qualifier marks the record as negated.
pub fn parse_gaf(text: &str) -> Result<Vec<AnnotationRecord>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('!') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 7 {
            return Err(FormatError::MalformedLine {
                line: line_no,
                reason: format!("expected at least 7 tab-separated columns, found {}", cols.len()),
            });
        }
        let evidence = cols[6].trim();
        if !is_valid_evidence_code(evidence) {
            return Err(FormatError::MalformedLine {
                line: line_no,
                reason: format!("invalid evidence code {evidence:?}"),
            });
        }
        out.push(AnnotationRecord {
            gene_id: cols[1].trim().to_string(),
            gene_symbol: cols[2].trim().to_string(),
            concept_id: cols[4].trim().to_string(),
            evidence_code: evidence.to_string(),
            qualifier_negated: cols[3].split('|').any(|q| q.trim() == "NOT"),
        });
    }
    Ok(out)
}
