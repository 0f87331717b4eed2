//! Character-offset helpers.
//!
//! Corpus offsets count Unicode scalar values, not bytes, so every slice
//! taken from a sentence or document goes through here.

/// Number of characters in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Byte index of the `char_index`-th character, or `text.len()` when the
/// index is one past the last character.
pub fn byte_index(text: &str, char_index: usize) -> Option<usize> {
    if char_index == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (byte, _) in text.char_indices() {
        if count == char_index {
            return Some(byte);
        }
        count += 1;
    }
    (count == char_index).then_some(text.len())
}

/// Slice `text` by character offsets `[start, end)`.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let from = byte_index(text, start)?;
    let to = byte_index(&text[from..], end - start)? + from;
    Some(&text[from..to])
}
