//! Fixtures, oracles and seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use biont::config::RunConfig;
use biont_core::instance::ParsedToken;
use biont_core::model::{
    forward, gradients, init_params, loss, seeded_rng, ChannelKind, ChannelSpec, Dropout, EncodedInstance, ModelParams,
    TrainConfig,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    fs::read_to_string(fixture(name)).unwrap()
}

pub fn config(name: &str) -> RunConfig {
    RunConfig::load(&fixture(name)).unwrap()
}

/// `# expect` / `! expect` lines of a fixture, split on whitespace after the tag.
pub fn expectations(text: &str, tag: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter_map(|l| l.strip_prefix(tag))
        .map(|rest| rest.split_whitespace().map(str::to_string).collect())
        .collect()
}

/// Ids and parent lists of a seeded random DAG with 1 to `max_nodes` nodes,
/// listed in a topological order.
pub fn random_dag(seed: u64, max_nodes: usize) -> Vec<(String, Vec<String>)> {
    let mut rng = seeded_rng(seed, 100);
    let n = rng.gen_range(1..=max_nodes);
    // ids are shuffled so id order and topological order disagree
    let mut ids: Vec<String> = (0..n).map(|i| format!("T:{i:03}")).collect();
    ids.shuffle(&mut rng);
    let mut nodes: Vec<(String, Vec<String>)> = Vec::with_capacity(n);
    for (k, id) in ids.iter().enumerate() {
        let mut parents = BTreeSet::new();
        if k > 0 && rng.gen_bool(0.85) {
            for _ in 0..rng.gen_range(1..=3) {
                parents.insert(ids[rng.gen_range(0..k)].clone());
            }
        }
        nodes.push((id.clone(), parents.into_iter().collect()));
    }
    nodes
}

pub fn dag_to_obo(nodes: &[(String, Vec<String>)]) -> String {
    let mut out = String::from("format-version: 1.2\n");
    for (id, parents) in nodes {
        out.push_str(&format!("\n[Term]\nid: {id}\nname: concept {id}\n"));
        for p in parents {
            out.push_str(&format!("is_a: {p} ! parent\n"));
        }
    }
    out
}

/// Reflexive-transitive closure of `is_a` by brute-force fixpoint.
pub fn closure(nodes: &[(String, Vec<String>)]) -> BTreeMap<String, BTreeSet<String>> {
    let parents: BTreeMap<&str, &Vec<String>> = nodes.iter().map(|(id, p)| (id.as_str(), p)).collect();
    let mut reach: BTreeMap<String, BTreeSet<String>> =
        nodes.iter().map(|(id, _)| (id.clone(), BTreeSet::from([id.clone()]))).collect();
    loop {
        let mut changed = false;
        for (id, _) in nodes {
            let mut add = BTreeSet::new();
            for a in &reach[id] {
                add.extend(parents[a.as_str()].iter().cloned());
            }
            let set = reach.get_mut(id).unwrap();
            let before = set.len();
            set.extend(add);
            changed |= set.len() != before;
        }
        if !changed {
            return reach;
        }
    }
}

/// Longest-path depth to a root, by recursion over parents.
pub fn oracle_depths(nodes: &[(String, Vec<String>)]) -> BTreeMap<String, usize> {
    let mut depth = BTreeMap::new();
    // nodes are topologically ordered, parents first
    for (id, parents) in nodes {
        let d = parents.iter().map(|p| depth[p] + 1).max().unwrap_or(0);
        depth.insert(id.clone(), d);
    }
    depth
}

/// A seeded random dependency tree with 1 to `max_tokens` tokens.
pub fn random_tree(seed: u64, max_tokens: usize) -> Vec<ParsedToken> {
    let mut rng = seeded_rng(seed, 200);
    let n = rng.gen_range(1..=max_tokens);
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(&mut rng);
    let mut heads = vec![0; n + 1];
    for k in 1..n {
        heads[order[k]] = order[rng.gen_range(0..k)];
    }
    (1..=n)
        .map(|i| ParsedToken {
            index: i,
            form: format!("w{i}"),
            lemma: format!("w{i}"),
            head: heads[i],
            deprel: "dep".into(),
            char_start: 4 * (i - 1),
            char_end: 4 * (i - 1) + 3,
        })
        .collect()
}

/// All-pairs edge distances over undirected head edges (Floyd-Warshall).
pub fn tree_distances(tokens: &[ParsedToken]) -> Vec<Vec<usize>> {
    let n = tokens.len();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n + 1]; n + 1];
    for i in 1..=n {
        d[i][i] = 0;
    }
    for t in tokens.iter().filter(|t| t.head != 0) {
        d[t.index][t.head] = 1;
        d[t.head][t.index] = 1;
    }
    for k in 1..=n {
        for i in 1..=n {
            for j in 1..=n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Every channel kind with dims between 2 and 4 and a vocabulary of 4.
pub fn tiny_specs() -> Vec<ChannelSpec> {
    ChannelKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &name)| ChannelSpec {
            name,
            vocab_size: 4,
            embed_dim: 2 + i % 3,
            hidden_dim: 4 - i % 2,
            max_len: 4,
        })
        .collect()
}

/// Parameters drawn uniformly from `±0.5`, padding rows zero.
pub fn tiny_params(seed: u64) -> ModelParams {
    let config = TrainConfig {
        dense_dim: 3,
        seed,
        ..TrainConfig::default()
    };
    let mut p = init_params(&tiny_specs(), &config).unwrap();
    let mut rng = seeded_rng(seed, 300);
    for t in p.tensors_mut() {
        for v in &mut t.data {
            *v = rng.gen_range(-0.5..0.5);
        }
    }
    for ch in &mut p.channels {
        ch.embedding.row_mut(0).fill(0.0);
    }
    p
}

/// Two items with padding ids, ragged lengths and one empty channel.
pub fn tiny_batch() -> Vec<EncodedInstance> {
    vec![
        EncodedInstance {
            channels: vec![vec![2, 3, 1, 3], vec![1, 2, 0, 0], vec![3, 2, 2], vec![]],
        },
        EncodedInstance {
            channels: vec![vec![3, 1], vec![2, 3, 3, 1], vec![1], vec![2, 3]],
        },
    ]
}

/// Largest relative error per tensor between analytic gradients and
/// central differences with step `1e-5`.
pub fn gradient_errors(params: &ModelParams, batch: &[EncodedInstance], labels: &[bool]) -> Vec<(String, f64)> {
    let eps = 1e-5;
    let analytic = gradients(params, batch, labels, 1.0).unwrap();
    let names: Vec<String> = params.tensors().into_iter().map(|(n, _)| n).collect();
    let mut out = Vec::with_capacity(names.len());
    for (t, name) in names.into_iter().enumerate() {
        let mut worst: f64 = 0.0;
        for k in 0..params.tensors()[t].1.len() {
            let shifted = |delta: f64| {
                let mut p = params.clone();
                p.tensors_mut()[t].data[k] += delta;
                loss(&forward(&p, batch, Dropout::Off).unwrap(), labels, 1.0)
            };
            let numeric = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
            let a = analytic.tensors()[t].1.data[k];
            // below 1e-6 central differences are dominated by round-off
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
        out.push((name, worst));
    }
    out
}
