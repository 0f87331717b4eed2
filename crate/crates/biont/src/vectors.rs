//! Textual word2vec vectors: an optional `count dim` header, then
//! `word v1 ... vd` per line.

use std::collections::BTreeMap;

use biont_core::model::ModelError;

/// Word vectors keyed by word, all of one dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordVectors {
    pub dim: usize,
    /// Words in file order.
    pub words: Vec<String>,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

fn header(line: &str) -> Option<usize> {
    let mut parts = line.split_whitespace();
    let (Some(count), Some(dim), None) = (parts.next(), parts.next(), parts.next()) else {
        return None;
    };
    count.parse::<usize>().ok()?;
    dim.parse().ok()
}

/// Parses the file and checks its dimension against `expected_dim`.
///
/// The dimension is fixed by the header when there is one, otherwise by
/// the first vector line; a line of any other width is malformed. Repeated
/// words keep their first vector.
pub fn parse_word_vectors(text: &str, expected_dim: usize) -> Result<WordVectors, ModelError> {
    let mut out = WordVectors::default();
    let mut dim: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if line == 1 {
            if let Some(d) = header(raw) {
                dim = Some(d);
                continue;
            }
        }
        let mut parts = raw.split_whitespace();
        let word = parts.next().ok_or(ModelError::MalformedVectorLine { line })?;
        let values = parts
            .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or(ModelError::MalformedVectorLine { line })?;
        if values.is_empty() {
            return Err(ModelError::MalformedVectorLine { line });
        }
        let width = *dim.get_or_insert(values.len());
        if values.len() != width {
            return Err(ModelError::MalformedVectorLine { line });
        }
        if !out.vectors.contains_key(word) {
            out.words.push(word.to_string());
            out.vectors.insert(word.to_string(), values);
        }
    }
    out.dim = dim.unwrap_or(expected_dim);
    if out.dim != expected_dim {
        return Err(ModelError::DimensionMismatch {
            expected: expected_dim,
            found: out.dim,
        });
    }
    Ok(out)
}
