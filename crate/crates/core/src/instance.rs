//! Candidate-pair instances built from parsed sentences.
//!
//! An instance carries three views of a pair of mentions: the masked tokens
//! on the shortest dependency path between their head tokens, the
//! supersense class of each of those tokens, and the ontology ancestor
//! chains of the concepts the mentions map to.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Diagnostics, EntityMention, EntityType, GoldRelation, Label, SentenceRecord};
use crate::onto::{AnnotationIndex, Namespace, OntologyBank};
use crate::text::char_len;

pub const CANDIDATE1: &str = "candidate1";
pub const CANDIDATE2: &str = "candidate2";
pub const OTHER_ENTITY: &str = "entity";
pub const NO_CLASS: &str = "O";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedToken {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    /// Index of the syntactic head, 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub char_start: usize,
    pub char_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("token {index} ({form:?}) not found in sentence text at or after offset {cursor}")]
    TokenAlignmentFailure { index: usize, form: String, cursor: usize },
    #[error("token {index} has head {head} outside the sentence")]
    InvalidHead { index: usize, head: usize },
    #[error("token indices must run 1..=n, found {found} at position {position}")]
    InvalidIndex { position: usize, found: usize },
    #[error("supersense class {class:?} for {lemma:?} is not declared")]
    UndeclaredClass { lemma: String, class: String },
}

/// Why a gold pair did not become an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SkipReason {
    UnknownMention,
    UnmappableEntity,
    MissingParse,
    NoOverlappingToken,
    SameHeadToken,
    Disconnected,
}

impl SkipReason {
    pub const fn as_str(self) -> &'static str {
        match self {
            SkipReason::UnknownMention => "UnknownMention",
            SkipReason::UnmappableEntity => "UnmappableEntity",
            SkipReason::MissingParse => "MissingParse",
            SkipReason::NoOverlappingToken => "NoOverlappingToken",
            SkipReason::SameHeadToken => "SameHeadToken",
            SkipReason::Disconnected => "Disconnected",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Character offsets for `forms`, found by greedy left-to-right matching.
pub fn align_tokens<S: AsRef<str>>(forms: &[S], text: &str) -> Result<Vec<(usize, usize)>, InstanceError> {
    let mut spans = Vec::with_capacity(forms.len());
    let mut byte_cursor = 0;
    let mut char_cursor = 0;
    for (i, form) in forms.iter().enumerate() {
        let form = form.as_ref();
        let found = if form.is_empty() {
            None
        } else {
            text[byte_cursor..].find(form)
        };
        let Some(offset) = found else {
            return Err(InstanceError::TokenAlignmentFailure {
                index: i + 1,
                form: form.to_string(),
                cursor: char_cursor,
            });
        };
        let start = char_cursor + char_len(&text[byte_cursor..byte_cursor + offset]);
        let end = start + char_len(form);
        spans.push((start, end));
        byte_cursor += offset + form.len();
        char_cursor = end;
    }
    Ok(spans)
}

/// Checks indices run 1..=n and heads stay in range. Returns the number of
/// root tokens; more than one is tolerated.
pub fn validate_parse(tokens: &[ParsedToken]) -> Result<usize, InstanceError> {
    let n = tokens.len();
    let mut roots = 0;
    for (position, token) in tokens.iter().enumerate() {
        if token.index != position + 1 {
            return Err(InstanceError::InvalidIndex {
                position,
                found: token.index,
            });
        }
        if token.head > n {
            return Err(InstanceError::InvalidHead {
                index: token.index,
                head: token.head,
            });
        }
        roots += usize::from(token.head == 0);
    }
    Ok(roots)
}

/// The syntactic head of a mention: the rightmost overlapping token whose
/// own head lies outside the mention.
pub fn head_token<'a>(tokens: &'a [ParsedToken], mention: &EntityMention) -> Option<&'a ParsedToken> {
    let inside = |t: &ParsedToken| mention.overlaps(t.char_start, t.char_end);
    let overlapping: Vec<&ParsedToken> = tokens.iter().filter(|t| inside(t)).collect();
    let external = overlapping.iter().rev().find(|t| {
        t.head == 0 || tokens.get(t.head - 1).map_or(true, |h| !inside(h))
    });
    external.or(overlapping.last()).copied()
}

/// Breadth-first shortest path between two tokens over undirected
/// (token, head) edges, endpoints included. Neighbours are expanded in
/// ascending index order. Returns token indices, or `None` when the tokens
/// sit in different trees.
pub fn shortest_dependency_path(tokens: &[ParsedToken], from: usize, to: usize) -> Option<Vec<usize>> {
    let n = tokens.len();
    if from == 0 || to == 0 || from > n || to > n {
        return None;
    }
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for token in tokens {
        if token.head != 0 && token.head != token.index {
            neighbours[token.index].push(token.head);
            neighbours[token.head].push(token.index);
        }
    }
    for list in &mut neighbours {
        list.sort_unstable();
        list.dedup();
    }

    let mut previous = vec![usize::MAX; n + 1];
    previous[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(current) = queue.pop_front() {
        if current == to {
            break;
        }
        for &next in &neighbours[current] {
            if previous[next] == usize::MAX {
                previous[next] = current;
                queue.push_back(next);
            }
        }
    }
    if previous[to] == usize::MAX {
        return None;
    }
    let mut path = vec![to];
    let mut current = to;
    while current != from {
        current = previous[current];
        path.push(current);
    }
    path.reverse();
    Some(path)
}

/// Lowercased path forms with the pair's head tokens replaced by
/// `candidate1`/`candidate2` (by order of appearance of the mentions) and
/// tokens of any other mention replaced by `entity`.
///
/// The two path endpoints are taken to be the heads of the pair.
pub fn mask_tokens(path: &[&ParsedToken], pair: [&EntityMention; 2], others: &[&EntityMention]) -> Vec<String> {
    let (first, _) = ordered(pair[0], pair[1]);
    let last = path.len().saturating_sub(1);
    let starts_at_first = path
        .first()
        .is_some_and(|t| first.overlaps(t.char_start, t.char_end));
    let (head_label, tail_label) = if starts_at_first {
        (CANDIDATE1, CANDIDATE2)
    } else {
        (CANDIDATE2, CANDIDATE1)
    };
    path.iter()
        .enumerate()
        .map(|(i, token)| {
            if i == 0 {
                head_label.to_string()
            } else if i == last {
                tail_label.to_string()
            } else if others.iter().any(|m| m.overlaps(token.char_start, token.char_end)) {
                OTHER_ENTITY.to_string()
            } else {
                token.form.to_lowercase()
            }
        })
        .collect()
}

fn ordered<'a>(a: &'a EntityMention, b: &'a EntityMention) -> (&'a EntityMention, &'a EntityMention) {
    let key = |m: &'a EntityMention| (m.char_start, m.char_end, m.mention_id.as_str());
    if key(a) <= key(b) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Lemma to supersense class, e.g. `increase` to `verb.change`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupersenseLexicon {
    classes: BTreeSet<String>,
    entries: BTreeMap<String, String>,
}

impl SupersenseLexicon {
    pub fn new<C, E>(classes: C, entries: E) -> Result<Self, InstanceError>
    where
        C: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String)>,
    {
        let classes: BTreeSet<String> = classes.into_iter().collect();
        let mut map = BTreeMap::new();
        for (lemma, class) in entries {
            if !classes.contains(&class) {
                return Err(InstanceError::UndeclaredClass { lemma, class });
            }
            map.insert(lemma.to_lowercase(), class);
        }
        Ok(SupersenseLexicon { classes, entries: map })
    }

    pub fn classes(&self) -> &BTreeSet<String> {
        &self.classes
    }

    pub fn lookup(&self, lemma: &str) -> &str {
        self.entries
            .get(&lemma.to_lowercase())
            .map(String::as_str)
            .unwrap_or(NO_CLASS)
    }
}

/// Supersense class per path token; masked tokens and misses give `O`.
pub fn supersense_classes(path: &[&ParsedToken], masked: &[String], lexicon: &SupersenseLexicon) -> Vec<String> {
    path.iter()
        .zip(masked)
        .map(|(token, mask)| {
            if is_mask(mask) {
                NO_CLASS.to_string()
            } else {
                lexicon.lookup(&token.lemma).to_string()
            }
        })
        .collect()
}

fn is_mask(token: &str) -> bool {
    matches!(token, CANDIDATE1 | CANDIDATE2 | OTHER_ENTITY)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub instance_id: String,
    pub sentence_id: String,
    pub pair: [String; 2],
    pub sdp_tokens: Vec<String>,
    pub sdp_classes: Vec<String>,
    pub left_chain: Vec<String>,
    pub right_chain: Vec<String>,
    pub common_chain: Option<Vec<String>>,
    pub label: Label,
}

impl Instance {
    /// Ontology input for the concatenation channel.
    pub fn onto_concat(&self) -> impl Iterator<Item = &str> {
        self.left_chain.iter().chain(&self.right_chain).map(String::as_str)
    }

    pub fn is_well_formed(&self) -> bool {
        let count = |w: &str| self.sdp_tokens.iter().filter(|t| *t == w).count();
        self.sdp_tokens.len() >= 2
            && self.sdp_tokens.len() == self.sdp_classes.len()
            && count(CANDIDATE1) == 1
            && count(CANDIDATE2) == 1
    }
}

/// Ontology routing for each entity type.
pub fn ontology_for(entity_type: EntityType) -> Namespace {
    match entity_type {
        EntityType::Gene => Namespace::Go,
        EntityType::Phenotype => Namespace::Hp,
        EntityType::Disease => Namespace::Doid,
        EntityType::Drug | EntityType::Chemical => Namespace::Chebi,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedConcept {
    pub namespace: Namespace,
    pub concept: String,
    /// Gene mapped to a root because it had no usable annotation.
    pub fallback: bool,
}

/// Maps mention kb ids onto ontology concepts.
///
/// Genes go through their representative GO term. Everything else is used
/// directly when the id is a live concept of the routed ontology and is
/// otherwise translated through the cross-reference table of that ontology.
#[derive(Debug, Clone, Default)]
pub struct ConceptResolver {
    pub ontologies: OntologyBank,
    pub xrefs: BTreeMap<Namespace, BTreeMap<String, String>>,
    pub annotations: AnnotationIndex,
}

impl ConceptResolver {
    pub fn resolve(&self, mention: &EntityMention) -> Option<MappedConcept> {
        let namespace = ontology_for(mention.entity_type);
        let graph = self.ontologies.get(namespace)?;
        if mention.entity_type == EntityType::Gene {
            let rep = self.annotations.representative(graph, &mention.kb_id);
            return Some(MappedConcept {
                namespace,
                concept: rep.concept,
                fallback: rep.fallback,
            });
        }
        let id = if graph.contains(&mention.kb_id) {
            mention.kb_id.as_str()
        } else {
            self.xrefs.get(&namespace)?.get(&mention.kb_id)?.as_str()
        };
        let concept = graph.resolve(id).ok()?;
        Some(MappedConcept {
            namespace,
            concept: concept.id.clone(),
            fallback: false,
        })
    }
}

/// An instance together with its audit flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltInstance {
    pub instance: Instance,
    pub gene_fallbacks: usize,
}

/// Builds the instance for one labeled pair of `sentence`.
pub fn build_instance(
    sentence: &SentenceRecord,
    pair: [&str; 2],
    label: Label,
    resolver: &ConceptResolver,
    lexicon: &SupersenseLexicon,
    tokens: &[ParsedToken],
) -> Result<BuiltInstance, SkipReason> {
    let a = sentence.mention(pair[0]).ok_or(SkipReason::UnknownMention)?;
    let b = sentence.mention(pair[1]).ok_or(SkipReason::UnknownMention)?;
    let (first, second) = ordered(a, b);

    let left = resolver.resolve(first).ok_or(SkipReason::UnmappableEntity)?;
    let right = resolver.resolve(second).ok_or(SkipReason::UnmappableEntity)?;

    let head1 = head_token(tokens, first).ok_or(SkipReason::NoOverlappingToken)?;
    let head2 = head_token(tokens, second).ok_or(SkipReason::NoOverlappingToken)?;
    if head1.index == head2.index {
        return Err(SkipReason::SameHeadToken);
    }
    let path: Vec<&ParsedToken> = shortest_dependency_path(tokens, head1.index, head2.index)
        .ok_or(SkipReason::Disconnected)?
        .into_iter()
        .map(|i| &tokens[i - 1])
        .collect();

    let others: Vec<&EntityMention> = sentence
        .entities
        .iter()
        .filter(|m| m.mention_id != first.mention_id && m.mention_id != second.mention_id)
        .collect();
    let sdp_tokens = mask_tokens(&path, [first, second], &others);
    let sdp_classes = supersense_classes(&path, &sdp_tokens, lexicon);

    let chain = |m: &MappedConcept| {
        resolver
            .ontologies
            .get(m.namespace)
            .and_then(|g| g.ancestor_chain(&m.concept).ok())
            .ok_or(SkipReason::UnmappableEntity)
    };
    let left_chain = chain(&left)?;
    let right_chain = chain(&right)?;
    let common_chain = if first.entity_type == second.entity_type {
        let graph = resolver.ontologies.get(left.namespace).ok_or(SkipReason::UnmappableEntity)?;
        Some(
            graph
                .common_ancestors(&left.concept, &right.concept)
                .map_err(|_| SkipReason::UnmappableEntity)?,
        )
    } else {
        None
    };

    Ok(BuiltInstance {
        instance: Instance {
            instance_id: format!("{}:{}:{}", sentence.sentence_id, first.mention_id, second.mention_id),
            sentence_id: sentence.sentence_id.clone(),
            pair: [first.mention_id.clone(), second.mention_id.clone()],
            sdp_tokens,
            sdp_classes,
            left_chain,
            right_chain,
            common_chain,
            label,
        },
        gene_fallbacks: usize::from(left.fallback) + usize::from(right.fallback),
    })
}

/// Instances for a whole corpus plus skip and flag counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Generation {
    pub instances: Vec<Instance>,
    /// One count per skipped gold pair, keyed by [`SkipReason`].
    pub skipped: Diagnostics,
    /// Non-fatal flags such as gene fallbacks.
    pub flags: Diagnostics,
}

/// Builds one instance per sentence-level relation of `corpus`, sorted by
/// sentence id then pair mention ids. With `keep_labels` false every
/// instance is `unlabeled`.
pub fn generate_instances(
    corpus: &Corpus,
    resolver: &ConceptResolver,
    lexicon: &SupersenseLexicon,
    parses: &BTreeMap<String, Vec<ParsedToken>>,
    keep_labels: bool,
) -> Generation {
    let sentences: BTreeMap<&str, &SentenceRecord> = corpus
        .sentences
        .iter()
        .map(|s| (s.sentence_id.as_str(), s))
        .collect();
    let mut out = Generation::default();
    for relation in &corpus.relations {
        match build_for_relation(relation, &sentences, resolver, lexicon, parses, keep_labels) {
            Ok(built) => {
                if built.gene_fallbacks > 0 {
                    out.flags.add("GeneFallback", built.gene_fallbacks);
                }
                out.instances.push(built.instance);
            }
            Err(reason) => out.skipped.bump(reason.as_str()),
        }
    }
    out.instances
        .sort_by(|a, b| (&a.sentence_id, &a.pair).cmp(&(&b.sentence_id, &b.pair)));
    out
}

fn build_for_relation(
    relation: &GoldRelation,
    sentences: &BTreeMap<&str, &SentenceRecord>,
    resolver: &ConceptResolver,
    lexicon: &SupersenseLexicon,
    parses: &BTreeMap<String, Vec<ParsedToken>>,
    keep_labels: bool,
) -> Result<BuiltInstance, SkipReason> {
    let (Some(sid), Some(m1), Some(m2)) = (&relation.sentence_id, &relation.e1_mention, &relation.e2_mention) else {
        return Err(SkipReason::UnknownMention);
    };
    let sentence = sentences.get(sid.as_str()).ok_or(SkipReason::UnknownMention)?;
    let tokens = parses.get(sid).ok_or(SkipReason::MissingParse)?;
    let label = if keep_labels { relation.label } else { Label::Unlabeled };
    build_instance(sentence, [m1, m2], label, resolver, lexicon, tokens)
}
