//! Span-level precision, recall and F1.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeling::{LabelError, LabeledSequence, Tag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("{gold} gold records but {pred} predicted")]
    RecordCount { gold: usize, pred: usize },
    #[error("record {record}: {gold} gold tokens but {pred} predicted")]
    TokenCount { record: usize, gold: usize, pred: usize },
    #[error("record {record}: {source}")]
    Labels { record: usize, source: LabelError },
}

/// A labeled run of tokens `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

/// Reads spans off a BIO sequence, ordered by start.
pub fn extract_spans(labels: &[String]) -> Result<Vec<Span>, LabelError> {
    let mut spans: Vec<Span> = Vec::new();
    let mut open = false;
    for (i, tag) in labels.iter().enumerate() {
        match Tag::parse(tag) {
            None => {
                return Err(LabelError::BadTag {
                    position: i,
                    tag: tag.clone(),
                })
            }
            Some(Tag::Outside) => open = false,
            Some(Tag::Begin(f)) => {
                spans.push(Span {
                    label: f.to_string(),
                    start: i,
                    end: i + 1,
                });
                open = true;
            }
            Some(Tag::Inside(f)) => match spans.last_mut() {
                Some(last) if open && last.label == f => last.end = i + 1,
                _ => {
                    return Err(LabelError::OrphanInside {
                        position: i,
                        tag: tag.clone(),
                    })
                }
            },
        }
    }
    Ok(spans)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold spans with this label.
    pub support: usize,
    pub predicted: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_counts(correct: usize, predicted: usize, gold: usize) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(correct, predicted);
        let recall = ratio(correct, gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanMetrics {
    /// Sorted by descending support, then label.
    pub per_label: Vec<LabelMetrics>,
    pub micro: Prf,
    /// Mean F1 over labels with gold support.
    pub macro_f1: f64,
    pub gold_spans: usize,
    pub predicted_spans: usize,
    pub correct_spans: usize,
    /// Fraction of tokens with the exact gold tag.
    pub token_accuracy: f64,
}

#[derive(Default)]
struct Counts {
    gold: usize,
    predicted: usize,
    correct: usize,
}

/// Scores predicted tag sequences against gold ones by exact span match.
pub fn score_tags<G, P>(gold: &[G], pred: &[P]) -> Result<SpanMetrics, EvalError>
where
    G: AsRef<[String]>,
    P: AsRef<[String]>,
{
    if gold.len() != pred.len() {
        return Err(EvalError::RecordCount {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let mut counts: BTreeMap<String, Counts> = BTreeMap::new();
    let mut tokens = 0usize;
    let mut tokens_right = 0usize;
    for (record, (g, p)) in gold.iter().zip(pred).enumerate() {
        let (g, p) = (g.as_ref(), p.as_ref());
        if g.len() != p.len() {
            return Err(EvalError::TokenCount {
                record,
                gold: g.len(),
                pred: p.len(),
            });
        }
        tokens += g.len();
        tokens_right += g.iter().zip(p).filter(|(a, b)| a == b).count();
        let wrap = |source| EvalError::Labels { record, source };
        let gs = extract_spans(g).map_err(wrap)?;
        let ps = extract_spans(p).map_err(wrap)?;
        let gset: HashSet<&Span> = gs.iter().collect();
        for s in &gs {
            counts.entry(s.label.clone()).or_default().gold += 1;
        }
        for s in &ps {
            let c = counts.entry(s.label.clone()).or_default();
            c.predicted += 1;
            if gset.contains(s) {
                c.correct += 1;
            }
        }
    }

    let mut per_label: Vec<LabelMetrics> = counts
        .iter()
        .map(|(label, c)| {
            let prf = Prf::from_counts(c.correct, c.predicted, c.gold);
            LabelMetrics {
                label: label.clone(),
                precision: prf.precision,
                recall: prf.recall,
                f1: prf.f1,
                support: c.gold,
                predicted: c.predicted,
                correct: c.correct,
            }
        })
        .collect();
    per_label.sort_by(|a, b| b.support.cmp(&a.support).then_with(|| a.label.cmp(&b.label)));

    let gold_spans: usize = counts.values().map(|c| c.gold).sum();
    let predicted_spans: usize = counts.values().map(|c| c.predicted).sum();
    let correct_spans: usize = counts.values().map(|c| c.correct).sum();
    let supported: Vec<f64> = per_label.iter().filter(|m| m.support > 0).map(|m| m.f1).collect();
    let macro_f1 = if supported.is_empty() {
        0.0
    } else {
        supported.iter().sum::<f64>() / supported.len() as f64
    };
    Ok(SpanMetrics {
        per_label,
        micro: Prf::from_counts(correct_spans, predicted_spans, gold_spans),
        macro_f1,
        gold_spans,
        predicted_spans,
        correct_spans,
        token_accuracy: if tokens == 0 {
            0.0
        } else {
            tokens_right as f64 / tokens as f64
        },
    })
}

/// Scores aligned datasets; records must pair up one-to-one with equal token counts.
pub fn score(gold: &[LabeledSequence], pred: &[LabeledSequence]) -> Result<SpanMetrics, EvalError> {
    let g: Vec<&[String]> = gold.iter().map(|s| s.labels.as_slice()).collect();
    let p: Vec<&[String]> = pred.iter().map(|s| s.labels.as_slice()).collect();
    score_tags(&g, &p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

/// Renders per-label rows and an overall row.
pub fn report(metrics: &SpanMetrics, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(metrics).expect("metrics serialize"),
        ReportFormat::Text => {
            let width = metrics
                .per_label
                .iter()
                .map(|m| m.label.chars().count())
                .chain(["overall".len(), "label".len()])
                .max()
                .unwrap_or(7);
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}",
                "label", "precision", "recall", "f1", "support"
            );
            for m in &metrics.per_label {
                let _ = writeln!(
                    out,
                    "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9}",
                    m.label, m.precision, m.recall, m.f1, m.support
                );
            }
            let _ = writeln!(
                out,
                "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9}",
                "overall", metrics.micro.precision, metrics.micro.recall, metrics.micro.f1, metrics.gold_spans
            );
            let _ = writeln!(out, "macro-f1 {:.4}  token-accuracy {:.4}", metrics.macro_f1, metrics.token_accuracy);
            out
        }
    }
}
