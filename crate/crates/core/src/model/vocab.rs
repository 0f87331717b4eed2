use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ChannelKind, ChannelSpec, ModelError};
use crate::instance::Instance;

pub const PAD: &str = "<pad>";
pub const OOV: &str = "<oov>";

/// Token to index map with padding at 0 and out-of-vocabulary at 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        let mut v = Vocabulary {
            tokens: Vec::new(),
            index: BTreeMap::new(),
        };
        v.insert(PAD);
        v.insert(OOV);
        v
    }
}

impl From<Vec<String>> for Vocabulary {
    fn from(tokens: Vec<String>) -> Self {
        let mut v = Vocabulary::default();
        for t in tokens.iter().skip(2) {
            v.insert(t);
        }
        v
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    pub fn insert(&mut self, token: &str) -> usize {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        let i = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), i);
        i
    }

    /// Index of `token`, 1 when unseen.
    pub fn get(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(1)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Keeps both ends of an over-long dependency path.
fn truncate_keep_ends<T: Clone>(seq: &[T], max_len: usize) -> Vec<T> {
    if seq.len() <= max_len {
        return seq.to_vec();
    }
    let tail = max_len / 2;
    let head = max_len - tail;
    let mut out = seq[..head].to_vec();
    out.extend_from_slice(&seq[seq.len() - tail..]);
    out
}

/// The raw token sequence a channel reads from an instance, truncated to
/// `max_len`. Chains keep their most specific end; the concatenation
/// channel gives each chain half of the budget.
pub fn channel_sequence(instance: &Instance, kind: ChannelKind, max_len: usize) -> Vec<&str> {
    fn strs(v: &[String]) -> Vec<&str> {
        v.iter().map(String::as_str).collect()
    }
    match kind {
        ChannelKind::Words => truncate_keep_ends(&strs(&instance.sdp_tokens), max_len),
        ChannelKind::Classes => truncate_keep_ends(&strs(&instance.sdp_classes), max_len),
        ChannelKind::OntoConcat => {
            let per_chain = (max_len / 2).max(1);
            let mut seq: Vec<&str> = instance.left_chain.iter().take(per_chain).map(String::as_str).collect();
            seq.extend(instance.right_chain.iter().take(per_chain).map(String::as_str));
            seq.truncate(max_len);
            seq
        }
        ChannelKind::OntoCommon => instance
            .common_chain
            .iter()
            .flatten()
            .take(max_len)
            .map(String::as_str)
            .collect(),
    }
}

/// One vocabulary per channel kind, tokens numbered by first occurrence.
/// `pretrained_words` are entered into the words vocabulary first.
pub fn build_vocabularies(
    instances: &[Instance],
    kinds: &[(ChannelKind, usize)],
    pretrained_words: &[String],
) -> Vec<Vocabulary> {
    kinds
        .iter()
        .map(|&(kind, max_len)| {
            let mut vocab = Vocabulary::default();
            if kind == ChannelKind::Words {
                for w in pretrained_words {
                    vocab.insert(w);
                }
            }
            for instance in instances {
                for token in channel_sequence(instance, kind, max_len) {
                    vocab.insert(token);
                }
            }
            vocab
        })
        .collect()
}

/// Token ids per channel, already truncated. Padding is implicit: the
/// recurrence only runs over real tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedInstance {
    pub channels: Vec<Vec<usize>>,
}

pub fn encode(instance: &Instance, specs: &[ChannelSpec], vocabs: &[Vocabulary]) -> Result<EncodedInstance, ModelError> {
    if specs.len() != vocabs.len() {
        return Err(ModelError::ShapeMismatch(alloc::format!(
            "{} channel specs but {} vocabularies",
            specs.len(),
            vocabs.len()
        )));
    }
    let channels = specs
        .iter()
        .zip(vocabs)
        .map(|(spec, vocab)| {
            channel_sequence(instance, spec.name, spec.max_len)
                .into_iter()
                .map(|t| vocab.get(t))
                .collect()
        })
        .collect();
    Ok(EncodedInstance { channels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use alloc::vec;

    fn instance(tokens: &[&str]) -> Instance {
        Instance {
            instance_id: "i".into(),
            sentence_id: "s".into(),
            pair: ["a".into(), "b".into()],
            sdp_tokens: tokens.iter().map(|t| t.to_string()).collect(),
            sdp_classes: tokens.iter().map(|_| "O".to_string()).collect(),
            left_chain: vec!["L2".into(), "L1".into(), "L0".into()],
            right_chain: vec!["R1".into(), "R0".into()],
            common_chain: None,
            label: Label::Positive,
        }
    }

    #[test]
    fn numbering_by_first_occurrence() {
        let vocabs = build_vocabularies(&[instance(&["a", "b", "a"])], &[(ChannelKind::Words, 10)], &[]);
        assert_eq!(vocabs[0].tokens(), ["<pad>", "<oov>", "a", "b"]);
        assert_eq!(vocabs[0].get("b"), 3);
        assert_eq!(vocabs[0].get("zzz"), 1);

        let empty = build_vocabularies(&[], &[(ChannelKind::Classes, 10)], &[]);
        assert_eq!(empty[0].tokens(), ["<pad>", "<oov>"]);

        let seeded = build_vocabularies(&[instance(&["a"])], &[(ChannelKind::Words, 10)], &["z".into(), "a".into()]);
        assert_eq!(seeded[0].tokens(), ["<pad>", "<oov>", "z", "a"]);
    }

    #[test]
    fn truncation_rules() {
        let inst = instance(&["c1", "x", "y", "z", "c2"]);
        assert_eq!(channel_sequence(&inst, ChannelKind::Words, 3), ["c1", "x", "c2"]);
        assert_eq!(channel_sequence(&inst, ChannelKind::Words, 4), ["c1", "x", "z", "c2"]);
        assert_eq!(channel_sequence(&inst, ChannelKind::Words, 9).len(), 5);
        assert_eq!(channel_sequence(&inst, ChannelKind::OntoConcat, 4), ["L2", "L1", "R1", "R0"]);
        assert_eq!(channel_sequence(&inst, ChannelKind::OntoConcat, 12), ["L2", "L1", "L0", "R1", "R0"]);
        assert!(channel_sequence(&inst, ChannelKind::OntoCommon, 4).is_empty());
    }

    #[test]
    fn vocabulary_serde_keeps_order() {
        let mut v = Vocabulary::default();
        v.insert("q");
        v.insert("b");
        let list: Vec<String> = v.clone().into();
        assert_eq!(Vocabulary::from(list), v);
    }
}
