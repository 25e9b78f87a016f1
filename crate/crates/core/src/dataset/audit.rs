use std::fmt::Write as _;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eval::{score_tags, SpanMetrics};
use crate::labeling::{check_bio, LabeledSequence};

use super::io::read_blocks;
use super::DatasetError;

/// One reviewed sequence from an audit file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditRecord {
    /// Index into the dataset the audit was drawn from.
    pub record: usize,
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
}

/// Writes `n` seeded-random sequences for manual review, in dataset order.
///
/// Each block opens with `# record <index> ...` followed by `token TAB label` lines.
/// Reviewers fix labels in place; [`audit_score`] compares the result to the originals.
pub fn audit_sample(dataset: &[LabeledSequence], n: usize, seed: u64) -> Result<String, DatasetError> {
    if n > dataset.len() {
        return Err(DatasetError::InvalidConfig(format!(
            "audit size {n} exceeds dataset size {}",
            dataset.len()
        )));
    }
    let mut picks = index::sample(&mut ChaCha8Rng::seed_from_u64(seed), dataset.len(), n).into_vec();
    picks.sort_unstable();
    let mut out = String::new();
    for (k, &i) in picks.iter().enumerate() {
        let s = &dataset[i];
        if k > 0 {
            out.push('\n');
        }
        let p = &s.provenance;
        let _ = writeln!(
            out,
            "# record {i} cite_key={} style={} source={}",
            p.cite_key, p.style_id, p.source_id
        );
        for (t, l) in s.tokens.iter().zip(&s.labels) {
            let _ = writeln!(out, "{t}\t{l}");
        }
    }
    Ok(out)
}

/// Reads an audit file back.
pub fn parse_audit(text: &str) -> Result<Vec<AuditRecord>, DatasetError> {
    read_blocks(text)?
        .into_iter()
        .map(|b| {
            let record = b
                .comments
                .iter()
                .find_map(|c| c.strip_prefix("record ")?.split_whitespace().next()?.parse().ok())
                .ok_or_else(|| DatasetError::Malformed {
                    line: b.first_line,
                    message: "block lacks a `# record N` header".into(),
                })?;
            check_bio(&b.labels).map_err(|e| DatasetError::Malformed {
                line: b.first_line,
                message: e.to_string(),
            })?;
            Ok(AuditRecord {
                record,
                tokens: b.tokens,
                labels: b.labels,
            })
        })
        .collect()
}

/// Span F1 of the original labels, taking the reviewed labels as gold.
pub fn audit_score(edited: &str, original: &[LabeledSequence]) -> Result<SpanMetrics, DatasetError> {
    let records = parse_audit(edited)?;
    let mut gold = Vec::with_capacity(records.len());
    let mut pred = Vec::with_capacity(records.len());
    for r in &records {
        let orig = original.get(r.record).ok_or_else(|| DatasetError::Malformed {
            line: 0,
            message: format!("record {} is outside the dataset", r.record),
        })?;
        if orig.tokens != r.tokens {
            return Err(DatasetError::Malformed {
                line: 0,
                message: format!("tokens of record {} were changed", r.record),
            });
        }
        gold.push(r.labels.as_slice());
        pred.push(orig.labels.as_slice());
    }
    score_tags(&gold, &pred).map_err(|e| DatasetError::Malformed {
        line: 0,
        message: e.to_string(),
    })
}
