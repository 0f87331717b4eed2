//! Positive-class metrics, predictions and sentence-grouped splitting.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::model::{seeded_rng, streams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub instance_id: String,
    pub prob_positive: f64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("instance {0} has a prediction but no gold label")]
    MissingGold(String),
    #[error("instance {0} has a gold label but no prediction")]
    MissingPrediction(String),
}

/// Counts and scores for the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Metrics {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f_score: f_score(precision, recall),
        }
    }

    /// From `(predicted_positive, gold_positive)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for (predicted, gold) in pairs {
            match (predicted, gold) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        Metrics::from_counts(tp, fp, fn_)
    }
}

/// Scores predictions against gold labels keyed by instance id. Both sides
/// must cover exactly the same ids.
pub fn compute_metrics(predictions: &[Prediction], gold: &BTreeMap<String, Label>) -> Result<Metrics, EvalError> {
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::with_capacity(predictions.len());
    for p in predictions {
        let g = gold
            .get(&p.instance_id)
            .ok_or_else(|| EvalError::MissingGold(p.instance_id.clone()))?;
        seen.insert(p.instance_id.as_str());
        pairs.push((p.label.is_positive(), g.is_positive()));
    }
    if let Some(missing) = gold.keys().find(|k| !seen.contains(k.as_str())) {
        return Err(EvalError::MissingPrediction(missing.clone()));
    }
    Ok(Metrics::from_pairs(pairs))
}

/// Seeded split that keeps every group (sentence) on one side.
///
/// Groups are ordered by key, shuffled, and the first `ceil(fraction * n)`
/// go to the first half. Items keep their input order on each side.
pub fn split_dataset<T, K>(items: Vec<T>, key: K, fraction: f64, seed: u64) -> (Vec<T>, Vec<T>)
where
    K: Fn(&T) -> &str,
{
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        groups.entry(key(item)).or_default().push(i);
    }
    let mut order: Vec<Vec<usize>> = groups.into_values().collect();
    order.shuffle(&mut seeded_rng(seed, streams::SPLIT));

    // a small slack keeps 0.7 * 10 from rounding up to 8
    let wanted = libm::ceil(fraction * order.len() as f64 - 1e-9).max(0.0) as usize;
    let mut to_first = alloc::vec![false; items.len()];
    for group in order.iter().take(wanted) {
        for &i in group {
            to_first[i] = true;
        }
    }
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (item, flag) in items.into_iter().zip(to_first) {
        if flag {
            first.push(item);
        } else {
            second.push(item);
        }
    }
    (first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn zero_division_rules() {
        let m = Metrics::from_counts(0, 0, 0);
        assert_eq!((m.precision, m.recall, m.f_score), (0.0, 0.0, 0.0));
        let m = Metrics::from_counts(0, 3, 2);
        assert_eq!(m.f_score, 0.0);
        let m = Metrics::from_counts(3, 1, 1);
        assert_eq!(m.precision, 0.75);
        assert_eq!(m.recall, 0.75);
        assert!((m.f_score - 0.75).abs() < 1e-15);
    }

    #[test]
    fn harmonic_mean_reproduces_reported_rows() {
        assert!((f_score(0.6784, 0.7775) - 0.7246).abs() <= 5e-5);
        assert!((f_score(0.8438, 0.7500) - 0.7941).abs() <= 5e-5);
    }

    fn pred(id: &str, positive: bool) -> Prediction {
        Prediction {
            instance_id: id.into(),
            prob_positive: if positive { 0.9 } else { 0.1 },
            label: Label::from_flag(positive),
        }
    }

    #[test]
    fn key_sets_must_match() {
        let gold: BTreeMap<String, Label> = [("a".to_string(), Label::Positive), ("b".to_string(), Label::Negative)].into();
        let m = compute_metrics(&[pred("a", true), pred("b", false)], &gold).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_), (1, 0, 0));
        assert_eq!(m.f_score, 1.0);
        assert_eq!(
            compute_metrics(&[pred("a", true)], &gold),
            Err(EvalError::MissingPrediction("b".into()))
        );
        assert_eq!(
            compute_metrics(&[pred("a", true), pred("b", true), pred("c", true)], &gold),
            Err(EvalError::MissingGold("c".into()))
        );
        let m = compute_metrics(&[pred("a", false), pred("b", false)], &gold).unwrap();
        assert_eq!(m.recall, 0.0);
    }

    #[test]
    fn split_rules() {
        let items: Vec<(String, usize)> = (0..10).flat_map(|s| (0..3).map(move |k| (format!("s{s}"), k))).collect();
        let (train, test) = split_dataset(items.clone(), |x| &x.0, 0.8, 4);
        let groups = |v: &[(String, usize)]| v.iter().map(|x| x.0.clone()).collect::<BTreeSet<_>>();
        assert_eq!(groups(&train).len(), 8);
        assert_eq!(groups(&test).len(), 2);
        assert!(groups(&train).is_disjoint(&groups(&test)));
        assert_eq!(split_dataset(items.clone(), |x| &x.0, 0.8, 4), (train, test));

        let (all, none) = split_dataset(items.clone(), |x| &x.0, 1.0, 4);
        assert_eq!(all.len(), 30);
        assert!(none.is_empty());
        let (train, _) = split_dataset(items, |x| &x.0, 0.7, 4);
        assert_eq!(groups(&train).len(), 7);
    }

    proptest! {
        #[test]
        fn f_is_bounded_by_min_and_mean(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50) {
            let m = Metrics::from_counts(tp, fp, fn_);
            if m.precision + m.recall > 0.0 {
                prop_assert!(m.precision.min(m.recall) <= m.f_score + 1e-15);
                prop_assert!(m.f_score <= (m.precision + m.recall) / 2.0 + 1e-15);
            }
        }
    }
}
