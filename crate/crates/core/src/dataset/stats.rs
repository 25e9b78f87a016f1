use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::eval::extract_spans;
use crate::labeling::{repair_bio, LabeledSequence};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCount {
    pub label: String,
    pub segments: usize,
    pub tokens: usize,
}

/// Corpus summary; a segment is a maximal run of tokens under one field label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_references: usize,
    pub avg_reference_tokens: f64,
    /// Distinct labels with at least one segment.
    pub n_segment_labels: usize,
    pub n_segments: usize,
    pub avg_segment_tokens: f64,
    pub vocabulary_size: usize,
    pub n_styles: usize,
    pub n_sources: usize,
    /// Sorted by descending segment count, then label.
    pub per_label_segment_counts: Vec<LabelCount>,
}

pub fn compute_stats(dataset: &[LabeledSequence]) -> DatasetStats {
    let mut per_label: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut vocab: HashSet<&str> = HashSet::new();
    let mut styles: HashSet<&str> = HashSet::new();
    let mut sources: HashSet<&str> = HashSet::new();
    let mut tokens = 0usize;
    for seq in dataset {
        tokens += seq.tokens.len();
        vocab.extend(seq.tokens.iter().map(String::as_str));
        styles.insert(&seq.provenance.style_id);
        sources.insert(&seq.provenance.source_id);
        let spans = extract_spans(&seq.labels).unwrap_or_else(|_| {
            let mut repaired = seq.labels.clone();
            repair_bio(&mut repaired);
            extract_spans(&repaired).unwrap_or_default()
        });
        for s in spans {
            let e = per_label.entry(s.label).or_default();
            e.0 += 1;
            e.1 += s.end - s.start;
        }
    }
    let n_segments: usize = per_label.values().map(|c| c.0).sum();
    let segment_tokens: usize = per_label.values().map(|c| c.1).sum();
    let mut table: Vec<LabelCount> = per_label
        .into_iter()
        .map(|(label, (segments, tokens))| LabelCount {
            label,
            segments,
            tokens,
        })
        .collect();
    table.sort_by(|a, b| b.segments.cmp(&a.segments).then_with(|| a.label.cmp(&b.label)));
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    DatasetStats {
        n_references: dataset.len(),
        avg_reference_tokens: ratio(tokens, dataset.len()),
        n_segment_labels: table.len(),
        n_segments,
        avg_segment_tokens: ratio(segment_tokens, n_segments),
        vocabulary_size: vocab.len(),
        n_styles: styles.len(),
        n_sources: sources.len(),
        per_label_segment_counts: table,
    }
}
