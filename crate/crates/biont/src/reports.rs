//! Tab-separated reports. Every report starts with a header row and ends
//! each line with LF.

use biont_core::corpus::Diagnostics;
use biont_core::eval::Metrics;
use biont_core::instance::SkipReason;
use biont_core::model::History;

use crate::error::FormatError;

/// One row per epoch; `selected` marks the epoch whose weights were kept.
pub fn history_report(history: &History) -> String {
    let mut out = String::from("epoch\ttrain_loss\ttrain_f\tdev_f\tselected\n");
    for e in &history.epochs {
        let selected = history.best_epoch == Some(e.epoch);
        out.push_str(&format!(
            "{}\t{:.6}\t{:.4}\t{:.4}\t{}\n",
            e.epoch, e.train_loss, e.train_f, e.dev_f, selected
        ));
    }
    out
}

/// Scores of one configuration as printed, rounded to 4 decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub configuration: String,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

pub fn metrics_report<'a>(rows: impl IntoIterator<Item = (&'a str, &'a Metrics)>) -> String {
    let mut out = String::from("configuration\tprecision\trecall\tf_score\n");
    for (name, m) in rows {
        out.push_str(&format!("{name}\t{:.4}\t{:.4}\t{:.4}\n", m.precision, m.recall, m.f_score));
    }
    out
}

/// Reads back a report written by [`metrics_report`].
pub fn parse_metrics_report(text: &str) -> Result<Vec<MetricsRow>, FormatError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "configuration\tprecision\trecall\tf_score")) => {}
        _ => return Err(FormatError::MissingColumn("configuration".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.is_empty()) {
        let malformed = |reason: &str| FormatError::MalformedLine {
            line: i + 1,
            reason: reason.into(),
        };
        let cols: Vec<&str> = line.split('\t').collect();
        let [configuration, p, r, f] = cols[..] else {
            return Err(malformed("expected 4 columns"));
        };
        let score = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| (0.0..=1.0).contains(x))
                .ok_or_else(|| malformed("score is not a number in [0, 1]"))
        };
        rows.push(MetricsRow {
            configuration: configuration.to_string(),
            precision: score(p)?,
            recall: score(r)?,
            f_score: score(f)?,
        });
    }
    Ok(rows)
}

/// Preprocessing counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreprocessSummary {
    pub gold_pairs: usize,
    pub instances: usize,
    /// Gold pairs that produced no instance, by reason.
    pub skipped: Diagnostics,
    /// Non-fatal events such as gene fallbacks or unused parses.
    pub flags: Diagnostics,
}

/// Reasons always listed in the diagnostics report, even at zero.
pub const REPORTED_SKIPS: [&str; 3] = [
    SkipReason::UnmappableEntity.as_str(),
    SkipReason::Disconnected.as_str(),
    "OffsetMismatch",
];

/// `metric TAB count`, with `skipped.` and `flag.` prefixes.
pub fn diagnostics_report(summary: &PreprocessSummary) -> String {
    let mut skipped = summary.skipped.clone();
    for reason in REPORTED_SKIPS {
        skipped.add(reason, 0);
    }
    let mut out = String::from("metric\tcount\n");
    out.push_str(&format!("gold_pairs\t{}\ninstances\t{}\n", summary.gold_pairs, summary.instances));
    for (reason, n) in skipped.iter() {
        out.push_str(&format!("skipped.{reason}\t{n}\n"));
    }
    for (flag, n) in summary.flags.iter() {
        out.push_str(&format!("flag.{flag}\t{n}\n"));
    }
    out
}
