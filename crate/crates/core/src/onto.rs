//! Ontology DAGs, ancestry queries and gene to GO-term mapping.
//!
//! An [`OntologyGraph`] is built once from a list of concepts and is
//! immutable afterwards. Only `is_a` edges are represented. Obsolete
//! concepts are kept so that lookups can report them, but every query
//! rejects them and no live concept may point at one.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Namespace {
    Go,
    Hp,
    Doid,
    Chebi,
    Custom,
}

impl Namespace {
    pub const ALL: [Namespace; 5] = [
        Namespace::Go,
        Namespace::Hp,
        Namespace::Doid,
        Namespace::Chebi,
        Namespace::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Namespace::Go => "go",
            Namespace::Hp => "hp",
            Namespace::Doid => "doid",
            Namespace::Chebi => "chebi",
            Namespace::Custom => "custom",
        }
    }
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Namespace {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Namespace::ALL
            .into_iter()
            .find(|ns| ns.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| OntologyError::UnknownNamespace(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("is_a cycle through {}", .0.join(", "))]
    CycleDetected(Vec<String>),
    #[error("{child} has is_a parent {parent} which is not a live concept")]
    DanglingParent { child: String, parent: String },
    #[error("duplicate concept id {0}")]
    DuplicateId(String),
    #[error("unknown concept {0}")]
    UnknownConcept(String),
    #[error("concept {0} is obsolete")]
    ObsoleteConcept(String),
    #[error("{left} and {right} belong to different ontologies")]
    CrossOntologyPair { left: String, right: String },
    #[error("ontology has no live concepts")]
    EmptyOntology,
    #[error("unknown ontology namespace {0:?}")]
    UnknownNamespace(String),
}

/// One `[Term]` of an ontology.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OntologyConcept {
    pub id: String,
    pub name: String,
    /// `is_a` targets.
    pub parents: Vec<String>,
    pub alt_ids: Vec<String>,
    pub obsolete: bool,
}

impl OntologyConcept {
    pub fn new(id: impl Into<String>) -> Self {
        OntologyConcept {
            id: id.into(),
            ..Default::default()
        }
    }

    pub fn with_parents<I, S>(mut self, parents: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.parents = parents.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Debug, Clone)]
pub struct OntologyGraph {
    namespace: Namespace,
    concepts: BTreeMap<String, OntologyConcept>,
    aliases: BTreeMap<String, String>,
    roots: BTreeSet<String>,
    depth: BTreeMap<String, usize>,
}

impl OntologyGraph {
    /// Validates and indexes `concepts`.
    ///
    /// Parent references through an `alt_id` are rewritten to the primary
    /// id. Fails on duplicate ids, parents that are missing or obsolete,
    /// and cycles.
    pub fn new<I>(namespace: Namespace, concepts: I) -> Result<Self, OntologyError>
    where
        I: IntoIterator<Item = OntologyConcept>,
    {
        let mut by_id = BTreeMap::new();
        for concept in concepts {
            if by_id.contains_key(&concept.id) {
                return Err(OntologyError::DuplicateId(concept.id));
            }
            by_id.insert(concept.id.clone(), concept);
        }

        let mut aliases = BTreeMap::new();
        for concept in by_id.values() {
            for alt in &concept.alt_ids {
                if by_id.contains_key(alt) || aliases.insert(alt.clone(), concept.id.clone()).is_some() {
                    return Err(OntologyError::DuplicateId(alt.clone()));
                }
            }
        }

        for concept in by_id.values_mut().filter(|c| !c.obsolete) {
            let mut parents = Vec::with_capacity(concept.parents.len());
            for parent in &concept.parents {
                let primary = aliases.get(parent).unwrap_or(parent);
                parents.push(primary.clone());
            }
            parents.sort();
            parents.dedup();
            concept.parents = parents;
        }
        for concept in by_id.values().filter(|c| !c.obsolete) {
            for parent in &concept.parents {
                match by_id.get(parent) {
                    Some(p) if !p.obsolete => {}
                    _ => {
                        return Err(OntologyError::DanglingParent {
                            child: concept.id.clone(),
                            parent: parent.clone(),
                        })
                    }
                }
            }
        }

        let (roots, depth) = layer(&by_id)?;
        if depth.is_empty() {
            return Err(OntologyError::EmptyOntology);
        }
        Ok(OntologyGraph {
            namespace,
            concepts: by_id,
            aliases,
            roots,
            depth,
        })
    }

    pub fn namespace(&self) -> Namespace {
        self.namespace
    }

    pub fn roots(&self) -> &BTreeSet<String> {
        &self.roots
    }

    /// Number of concepts, obsolete ones included.
    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concepts(&self) -> impl Iterator<Item = &OntologyConcept> {
        self.concepts.values()
    }

    /// Looks up `id` or one of its alt_ids without the obsolete check.
    pub fn get(&self, id: &str) -> Option<&OntologyConcept> {
        let primary = self.aliases.get(id).map(String::as_str).unwrap_or(id);
        self.concepts.get(primary)
    }

    /// Resolves `id` (or an alt_id) to a live concept.
    pub fn resolve(&self, id: &str) -> Result<&OntologyConcept, OntologyError> {
        let concept = self
            .get(id)
            .ok_or_else(|| OntologyError::UnknownConcept(id.to_owned()))?;
        if concept.obsolete {
            return Err(OntologyError::ObsoleteConcept(concept.id.clone()));
        }
        Ok(concept)
    }

    /// True when `id` resolves to a live concept.
    pub fn contains(&self, id: &str) -> bool {
        self.resolve(id).is_ok()
    }

    /// Longest-path edge count from `id` to any root.
    pub fn depth(&self, id: &str) -> Result<usize, OntologyError> {
        let concept = self.resolve(id)?;
        Ok(self.depth[&concept.id])
    }

    fn depth_of(&self, primary: &str) -> usize {
        self.depth[primary]
    }

    /// The path from `id` up to a root that always steps to the deepest
    /// parent (smallest id on ties). Its length is `depth(id) + 1`.
    pub fn ancestor_chain(&self, id: &str) -> Result<Vec<String>, OntologyError> {
        let mut current = self.resolve(id)?;
        let mut chain = Vec::with_capacity(self.depth_of(&current.id) + 1);
        chain.push(current.id.clone());
        while !current.parents.is_empty() {
            // parents are sorted: the first strict maximum has the smallest id
            let mut best = &current.parents[0];
            for parent in &current.parents[1..] {
                if self.depth_of(parent) > self.depth_of(best) {
                    best = parent;
                }
            }
            current = &self.concepts[best];
            chain.push(current.id.clone());
        }
        Ok(chain)
    }

    /// Transitive closure over `is_a`, including `id` itself iff `inclusive`.
    pub fn ancestor_set(&self, id: &str, inclusive: bool) -> Result<BTreeSet<&str>, OntologyError> {
        let start = self.resolve(id)?;
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut queue: VecDeque<&OntologyConcept> = VecDeque::new();
        queue.push_back(start);
        while let Some(concept) = queue.pop_front() {
            for parent in &concept.parents {
                if seen.insert(parent.as_str()) {
                    queue.push_back(&self.concepts[parent]);
                }
            }
        }
        if inclusive {
            seen.insert(start.id.as_str());
        }
        Ok(seen)
    }

    /// Shared inclusive ancestors of two concepts, deepest first, then by id.
    pub fn common_ancestors(&self, left: &str, right: &str) -> Result<Vec<String>, OntologyError> {
        let a = self.ancestor_set(left, true)?;
        let b = self.ancestor_set(right, true)?;
        let mut shared: Vec<&str> = a.intersection(&b).copied().collect();
        shared.sort_by_key(|id| (Reverse(self.depth_of(id)), *id));
        Ok(shared.into_iter().map(ToOwned::to_owned).collect())
    }

    /// Lexicographically smallest root.
    pub fn first_root(&self) -> &str {
        // construction guarantees at least one live concept, hence a root
        self.roots.iter().next().map(String::as_str).unwrap_or_default()
    }
}

/// Kahn layering over live concepts: returns roots and longest-path depths.
fn layer(
    concepts: &BTreeMap<String, OntologyConcept>,
) -> Result<(BTreeSet<String>, BTreeMap<String, usize>), OntologyError> {
    let live = || concepts.values().filter(|c| !c.obsolete);
    let mut pending: BTreeMap<&str, usize> = BTreeMap::new();
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for concept in live() {
        pending.insert(&concept.id, concept.parents.len());
        for parent in &concept.parents {
            children.entry(parent).or_default().push(&concept.id);
        }
    }

    let roots: BTreeSet<String> = live()
        .filter(|c| c.parents.is_empty())
        .map(|c| c.id.clone())
        .collect();
    let mut depth: BTreeMap<String, usize> = BTreeMap::new();
    let mut queue: VecDeque<&str> = roots.iter().map(String::as_str).collect();
    while let Some(id) = queue.pop_front() {
        let d = concepts[id]
            .parents
            .iter()
            .map(|p| depth[p] + 1)
            .max()
            .unwrap_or(0);
        depth.insert(id.to_owned(), d);
        for child in children.get(id).into_iter().flatten() {
            let left = pending.get_mut(child).expect("child is live");
            *left -= 1;
            if *left == 0 {
                queue.push_back(child);
            }
        }
    }

    if depth.len() < pending.len() {
        return Err(OntologyError::CycleDetected(find_cycle(concepts, &depth)));
    }
    Ok((roots, depth))
}

/// Every concept Kahn could not place has an unplaced parent, so walking
/// unplaced parents from any of them must revisit a node.
fn find_cycle(concepts: &BTreeMap<String, OntologyConcept>, placed: &BTreeMap<String, usize>) -> Vec<String> {
    let unplaced = |id: &str| !placed.contains_key(id);
    let start = concepts
        .values()
        .find(|c| !c.obsolete && unplaced(&c.id))
        .expect("called with an unplaced concept");
    let mut path: Vec<&str> = Vec::new();
    let mut position: BTreeMap<&str, usize> = BTreeMap::new();
    let mut current = start.id.as_str();
    loop {
        if let Some(&at) = position.get(current) {
            let mut cycle: Vec<String> = path[at..].iter().map(|s| (*s).to_owned()).collect();
            cycle.sort();
            return cycle;
        }
        position.insert(current, path.len());
        path.push(current);
        current = concepts[current]
            .parents
            .iter()
            .find(|p| unplaced(p))
            .expect("unplaced concept has an unplaced parent");
    }
}

/// Several ontologies keyed by namespace.
#[derive(Debug, Clone, Default)]
pub struct OntologyBank {
    graphs: BTreeMap<Namespace, OntologyGraph>,
}

impl OntologyBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, graph: OntologyGraph) {
        self.graphs.insert(graph.namespace(), graph);
    }

    pub fn get(&self, namespace: Namespace) -> Option<&OntologyGraph> {
        self.graphs.get(&namespace)
    }

    /// The graph in which `id` is defined, obsolete or not.
    pub fn locate(&self, id: &str) -> Option<&OntologyGraph> {
        self.graphs.values().find(|g| g.get(id).is_some())
    }

    /// Common ancestors of two concepts that must share one ontology.
    pub fn common_ancestors(&self, left: &str, right: &str) -> Result<Vec<String>, OntologyError> {
        let lg = self
            .locate(left)
            .ok_or_else(|| OntologyError::UnknownConcept(left.to_owned()))?;
        let rg = self
            .locate(right)
            .ok_or_else(|| OntologyError::UnknownConcept(right.to_owned()))?;
        if lg.namespace() != rg.namespace() {
            return Err(OntologyError::CrossOntologyPair {
                left: left.to_owned(),
                right: right.to_owned(),
            });
        }
        lg.common_ancestors(left, right)
    }
}

/// GO evidence codes backed by experiments, including high-throughput ones.
pub const EXPERIMENTAL_EVIDENCE: [&str; 11] = [
    "EXP", "IDA", "IPI", "IMP", "IGI", "IEP", "HTP", "HDA", "HMP", "HGI", "HEP",
];

pub fn is_experimental(evidence_code: &str) -> bool {
    EXPERIMENTAL_EVIDENCE.contains(&evidence_code)
}

/// Uppercase ASCII letters, 2 to 4 of them.
pub fn is_valid_evidence_code(code: &str) -> bool {
    (2..=4).contains(&code.len()) && code.bytes().all(|b| b.is_ascii_uppercase())
}

/// One gene to GO-term annotation line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub gene_id: String,
    pub gene_symbol: String,
    pub concept_id: String,
    pub evidence_code: String,
    pub qualifier_negated: bool,
}

/// Outcome of mapping a gene onto a single ontology concept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representative {
    pub concept: String,
    /// Set when the gene had no usable annotation and the first root was used.
    pub fallback: bool,
}

/// Annotations grouped by gene id and gene symbol.
#[derive(Debug, Clone, Default)]
pub struct AnnotationIndex {
    records: Vec<AnnotationRecord>,
    by_gene: BTreeMap<String, Vec<usize>>,
}

impl AnnotationIndex {
    pub fn new(records: Vec<AnnotationRecord>) -> Self {
        let mut by_gene: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, record) in records.iter().enumerate() {
            by_gene.entry(record.gene_id.clone()).or_default().push(i);
            if !record.gene_symbol.is_empty() && record.gene_symbol != record.gene_id {
                by_gene.entry(record.gene_symbol.clone()).or_default().push(i);
            }
        }
        AnnotationIndex { records, by_gene }
    }

    pub fn records_for(&self, gene: &str) -> impl Iterator<Item = &AnnotationRecord> {
        self.by_gene
            .get(gene)
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    pub fn representative(&self, graph: &OntologyGraph, gene: &str) -> Representative {
        pick_representative(graph, self.records_for(gene))
    }
}

/// Most representative concept for `gene_id` (matched against the gene id
/// or the gene symbol column).
///
/// Experimental evidence wins over everything else; within the winning
/// group the deepest concept wins, then the smallest id. Negated records and
/// records pointing at unknown or obsolete concepts are ignored. A gene with
/// nothing usable maps to the graph's first root with `fallback` set.
pub fn representative_concept(graph: &OntologyGraph, annotations: &[AnnotationRecord], gene_id: &str) -> Representative {
    pick_representative(
        graph,
        annotations
            .iter()
            .filter(|r| r.gene_id == gene_id || r.gene_symbol == gene_id),
    )
}

fn pick_representative<'a>(graph: &OntologyGraph, records: impl Iterator<Item = &'a AnnotationRecord>) -> Representative {
    let mut experimental: Option<(usize, &str)> = None;
    let mut any: Option<(usize, &str)> = None;
    let better = |slot: &Option<(usize, &str)>, depth: usize, id: &str| match slot {
        None => true,
        Some((d, best)) => depth > *d || (depth == *d && id < *best),
    };
    for record in records.filter(|r| !r.qualifier_negated) {
        let Ok(concept) = graph.resolve(&record.concept_id) else {
            continue;
        };
        let depth = graph.depth_of(&concept.id);
        if better(&any, depth, &concept.id) {
            any = Some((depth, &concept.id));
        }
        if is_experimental(&record.evidence_code) && better(&experimental, depth, &concept.id) {
            experimental = Some((depth, &concept.id));
        }
    }
    match experimental.or(any) {
        Some((_, id)) => Representative {
            concept: id.to_owned(),
            fallback: false,
        },
        None => Representative {
            concept: graph.first_root().to_owned(),
            fallback: true,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn concept(id: &str, parents: &[&str]) -> OntologyConcept {
        OntologyConcept::new(id).with_parents(parents.iter().copied())
    }

    fn graph(concepts: Vec<OntologyConcept>) -> OntologyGraph {
        OntologyGraph::new(Namespace::Custom, concepts).unwrap()
    }

    /// A, B<A, C<A, E<C, D<B, D<E: paths A-B-D and A-C-E-D.
    fn diamond_with_detour() -> OntologyGraph {
        graph(vec![
            concept("A", &[]),
            concept("B", &["A"]),
            concept("C", &["A"]),
            concept("E", &["C"]),
            concept("D", &["B", "E"]),
        ])
    }

    /// Every root-ward path from `id`, enumerated exhaustively.
    fn all_paths(g: &OntologyGraph, id: &str) -> Vec<Vec<String>> {
        let c = g.get(id).unwrap();
        if c.parents.is_empty() {
            return vec![vec![id.to_owned()]];
        }
        let mut out = Vec::new();
        for p in &c.parents {
            for mut tail in all_paths(g, p) {
                tail.insert(0, id.to_owned());
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn depth_is_longest_enumerated_path() {
        let g = diamond_with_detour();
        let paths = all_paths(&g, "D");
        assert_eq!(paths.len(), 2);
        let longest = paths.iter().map(|p| p.len() - 1).max().unwrap();
        assert_eq!(longest, 3);
        assert_eq!(g.depth("D").unwrap(), 3);
        assert_eq!(g.depth("A").unwrap(), 0);
        assert_eq!(g.ancestor_chain("D").unwrap(), ["D", "E", "C", "A"]);
    }

    #[test]
    fn alt_id_resolves_to_primary() {
        let mut root = concept("R", &[]);
        root.alt_ids.push("R_OLD".into());
        let g = graph(vec![root, concept("X", &["R_OLD"])]);
        assert_eq!(g.depth("R_OLD").unwrap(), 0);
        assert_eq!(g.get("X").unwrap().parents, ["R"]);
        assert_eq!(g.ancestor_chain("R_OLD").unwrap(), ["R"]);
    }

    #[test]
    fn chain_of_single_parent_line_and_root() {
        let g = graph(vec![concept("A", &[]), concept("B", &["A"]), concept("C", &["B"])]);
        assert_eq!(g.ancestor_chain("C").unwrap(), ["C", "B", "A"]);
        assert_eq!(g.ancestor_chain("A").unwrap(), ["A"]);
    }

    #[test]
    fn chain_tie_breaks_on_smallest_id() {
        let g = graph(vec![concept("R", &[]), concept("Q", &["R"]), concept("P", &["R"]), concept("X", &["Q", "P"])]);
        assert_eq!(g.ancestor_chain("X").unwrap(), ["X", "P", "R"]);
    }

    #[test]
    fn ancestor_sets() {
        let g = graph(vec![concept("A", &[]), concept("B", &["A"]), concept("C", &["A"]), concept("D", &["B", "C"])]);
        assert!(g.ancestor_set("A", false).unwrap().is_empty());
        let d: Vec<&str> = g.ancestor_set("D", true).unwrap().into_iter().collect();
        assert_eq!(d, ["A", "B", "C", "D"]);
        assert_eq!(g.common_ancestors("B", "C").unwrap(), ["A"]);
        assert_eq!(g.common_ancestors("D", "D").unwrap(), ["D", "B", "C", "A"]);
    }

    #[test]
    fn construction_errors() {
        let err = OntologyGraph::new(Namespace::Custom, vec![concept("A", &["B"]), concept("B", &["A"])]).unwrap_err();
        assert_eq!(err, OntologyError::CycleDetected(vec!["A".into(), "B".into()]));

        let err = OntologyGraph::new(
            Namespace::Custom,
            vec![concept("R", &[]), concept("A", &["R", "C"]), concept("B", &["A"]), concept("C", &["B"])],
        )
        .unwrap_err();
        assert_eq!(err, OntologyError::CycleDetected(vec!["A".into(), "B".into(), "C".into()]));

        let err = OntologyGraph::new(Namespace::Custom, vec![concept("A", &["Z"])]).unwrap_err();
        assert!(matches!(err, OntologyError::DanglingParent { .. }));

        let err = OntologyGraph::new(Namespace::Custom, vec![concept("A", &[]), concept("A", &[])]).unwrap_err();
        assert_eq!(err, OntologyError::DuplicateId("A".into()));

        let mut b = concept("B", &[]);
        b.alt_ids.push("A".into());
        let err = OntologyGraph::new(Namespace::Custom, vec![concept("A", &[]), b]).unwrap_err();
        assert_eq!(err, OntologyError::DuplicateId("A".into()));

        let err = OntologyGraph::new(Namespace::Custom, vec![concept("S", &["S"])]).unwrap_err();
        assert_eq!(err, OntologyError::CycleDetected(vec!["S".into()]));
    }

    #[test]
    fn obsolete_concepts_are_rejected_by_queries() {
        let mut old = concept("OLD", &["A"]);
        old.obsolete = true;
        let g = graph(vec![concept("A", &[]), old]);
        assert_eq!(g.depth("OLD"), Err(OntologyError::ObsoleteConcept("OLD".into())));
        assert!(g.ancestor_chain("OLD").is_err());
        assert!(g.ancestor_set("OLD", true).is_err());
        assert_eq!(g.depth("NOPE"), Err(OntologyError::UnknownConcept("NOPE".into())));
        assert_eq!(g.len(), 2);

        let mut old = concept("OLD", &[]);
        old.obsolete = true;
        let err = OntologyGraph::new(Namespace::Custom, vec![old, concept("B", &["OLD"])]).unwrap_err();
        assert!(matches!(err, OntologyError::DanglingParent { .. }));
    }

    #[test]
    fn bank_rejects_cross_ontology_pairs() {
        let mut bank = OntologyBank::new();
        bank.insert(OntologyGraph::new(Namespace::Hp, vec![concept("HP:1", &[])]).unwrap());
        bank.insert(OntologyGraph::new(Namespace::Go, vec![concept("GO:1", &[]), concept("GO:2", &["GO:1"])]).unwrap());
        assert!(matches!(
            bank.common_ancestors("HP:1", "GO:2"),
            Err(OntologyError::CrossOntologyPair { .. })
        ));
        assert_eq!(bank.common_ancestors("GO:2", "GO:2").unwrap(), ["GO:2", "GO:1"]);
        assert_eq!(bank.common_ancestors("GO:9", "GO:2"), Err(OntologyError::UnknownConcept("GO:9".into())));
    }

    fn annotation(gene: &str, term: &str, code: &str) -> AnnotationRecord {
        AnnotationRecord {
            gene_id: gene.into(),
            gene_symbol: String::new(),
            concept_id: term.into(),
            evidence_code: code.into(),
            qualifier_negated: false,
        }
    }

    /// Line GO:R <- GO:1 <- GO:2 <- GO:3 <- GO:4 <- GO:5, plus GO:3B beside GO:3.
    fn go_line() -> OntologyGraph {
        graph(vec![
            concept("GO:R", &[]),
            concept("GO:1", &["GO:R"]),
            concept("GO:2", &["GO:1"]),
            concept("GO:3", &["GO:2"]),
            concept("GO:3B", &["GO:2"]),
            concept("GO:4", &["GO:3"]),
            concept("GO:5", &["GO:4"]),
        ])
    }

    #[test]
    fn representative_prefers_experimental_then_depth() {
        let g = go_line();
        let recs = vec![annotation("g", "GO:3", "IDA"), annotation("g", "GO:5", "IEA")];
        assert_eq!(representative_concept(&g, &recs, "g").concept, "GO:3");

        let recs = vec![annotation("g", "GO:3", "IDA"), annotation("g", "GO:4", "IMP")];
        assert_eq!(representative_concept(&g, &recs, "g").concept, "GO:4");

        let recs = vec![annotation("g", "GO:2", "IEA"), annotation("g", "GO:4", "IEA")];
        assert_eq!(representative_concept(&g, &recs, "g").concept, "GO:4");

        let recs = vec![annotation("g", "GO:3B", "IDA"), annotation("g", "GO:3", "IDA")];
        assert_eq!(representative_concept(&g, &recs, "g").concept, "GO:3");
    }

    #[test]
    fn representative_skips_negated_and_unknown_then_falls_back() {
        let g = go_line();
        let mut negated = annotation("g", "GO:5", "IDA");
        negated.qualifier_negated = true;
        let recs = vec![negated, annotation("g", "GO:404", "IDA"), annotation("g", "GO:1", "IEA")];
        let rep = representative_concept(&g, &recs, "g");
        assert_eq!(rep, Representative { concept: "GO:1".into(), fallback: false });

        let rep = representative_concept(&g, &recs, "other");
        assert_eq!(rep, Representative { concept: "GO:R".into(), fallback: true });

        let mut by_symbol = annotation("P12345", "GO:4", "IPI");
        by_symbol.gene_symbol = "CRB1".into();
        let index = AnnotationIndex::new(vec![by_symbol]);
        assert_eq!(index.representative(&g, "CRB1").concept, "GO:4");
        assert_eq!(index.representative(&g, "P12345").concept, "GO:4");
    }

    #[test]
    fn evidence_code_shape() {
        assert!(is_valid_evidence_code("IDA"));
        assert!(is_valid_evidence_code("EXP"));
        assert!(is_valid_evidence_code("IBA"));
        assert!(!is_valid_evidence_code("I"));
        assert!(!is_valid_evidence_code("ida"));
        assert!(!is_valid_evidence_code("IDAXX"));
        assert!(is_experimental("HTP"));
        assert!(!is_experimental("IEA"));
    }

    /// Random DAG with a single root: node i>0 gets parents among j<i.
    fn random_dag(n: usize, edges: &[bool], forced: &[usize]) -> OntologyGraph {
        let mut concepts = vec![concept("N000", &[])];
        let mut k = 0;
        for i in 1..n {
            let mut parents = Vec::new();
            for j in 0..i {
                if edges[k % edges.len()] {
                    parents.push(alloc::format!("N{j:03}"));
                }
                k += 1;
            }
            if parents.is_empty() {
                parents.push(alloc::format!("N{:03}", forced[i % forced.len()] % i));
            }
            concepts.push(OntologyConcept::new(alloc::format!("N{i:03}")).with_parents(parents));
        }
        graph(concepts)
    }

    /// Closure by repeated edge expansion until nothing changes.
    fn closure_oracle(g: &OntologyGraph, id: &str) -> BTreeSet<String> {
        let mut set: BTreeSet<String> = BTreeSet::new();
        set.insert(id.to_owned());
        loop {
            let mut grown = set.clone();
            for member in &set {
                for p in &g.get(member).unwrap().parents {
                    grown.insert(p.clone());
                }
            }
            if grown.len() == set.len() {
                return set;
            }
            set = grown;
        }
    }

    proptest! {
        #[test]
        fn ancestry_matches_oracles(
            n in 2usize..25,
            edges in proptest::collection::vec(proptest::bool::weighted(0.15), 1..300),
            forced in proptest::collection::vec(0usize..1000, 1..30),
            pick in 0usize..1000,
            other in 0usize..1000,
        ) {
            let g = random_dag(n, &edges, &forced);
            let a = alloc::format!("N{:03}", pick % n);
            let b = alloc::format!("N{:03}", other % n);

            let set: BTreeSet<String> = g.ancestor_set(&a, true).unwrap().into_iter().map(ToOwned::to_owned).collect();
            prop_assert_eq!(&set, &closure_oracle(&g, &a));

            let chain = g.ancestor_chain(&a).unwrap();
            prop_assert_eq!(chain.len(), g.depth(&a).unwrap() + 1);
            for pair in chain.windows(2) {
                prop_assert!(g.get(&pair[0]).unwrap().parents.contains(&pair[1]));
            }
            prop_assert!(chain.iter().all(|c| set.contains(c)));

            let ab = g.common_ancestors(&a, &b).unwrap();
            prop_assert_eq!(&ab, &g.common_ancestors(&b, &a).unwrap());
            let expected: BTreeSet<String> = set.intersection(&closure_oracle(&g, &b)).cloned().collect();
            prop_assert_eq!(ab.iter().cloned().collect::<BTreeSet<_>>(), expected);
        }
    }
}
