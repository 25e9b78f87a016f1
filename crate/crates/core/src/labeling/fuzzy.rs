use std::cmp::Reverse;

use indexmap::IndexMap;

use crate::bibtex::parse_names;
use crate::style::{abbreviate_journal, format_names, month_name, page_range, MarkedSpan, NameFormat, NAME_FIELDS};

use super::align::label_tokens;
use super::{tokenize, LabelError, LabeledSequence, Provenance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyConfig {
    /// Largest accepted edit distance divided by the longer string length.
    pub threshold: f64,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        FuzzyConfig { threshold: 0.35 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzyAlignment {
    pub sequence: LabeledSequence,
    /// Fields with no window under the threshold, sorted.
    pub unmatched: Vec<String>,
}

/// Levenshtein distance over chars.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    bounded_distance(&a, &b, usize::MAX).expect("unbounded")
}

/// Edit distance divided by the longer length; 0 for two empty strings.
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        0.0
    } else {
        edit_distance(a, b) as f64 / longest as f64
    }
}

/// Levenshtein distance, or `None` once it must exceed `max`.
fn bounded_distance(a: &[char], b: &[char], max: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > max {
        return None;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        let mut row_min = cur[0];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
            row_min = row_min.min(cur[j + 1]);
        }
        if row_min > max {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[b.len()];
    (d <= max).then_some(d)
}

/// Renderings a field value may take in a styled reference.
fn surface_forms(label: &str, value: &str) -> Vec<String> {
    let mut forms = vec![value.to_string()];
    if NAME_FIELDS.contains(&label) {
        if let Ok(names) = parse_names(value) {
            if !names.is_empty() {
                for fmt in [
                    NameFormat::Full,
                    NameFormat::InitialsFirst,
                    NameFormat::InitialsLast,
                    NameFormat::LastFirst,
                ] {
                    forms.push(format_names(&names, fmt, None));
                    forms.push(format_names(&names, fmt, Some(1)));
                }
            }
        }
    }
    match label {
        "journal" => forms.push(abbreviate_journal(value)),
        "month" => forms.push(month_name(value)),
        "pages" => forms.push(page_range(value)),
        _ => {}
    }
    forms.sort();
    forms.dedup();
    forms.retain(|f| !f.is_empty());
    forms
}

struct Candidate<'a> {
    distance: f64,
    value_len: usize,
    label: &'a str,
    first: usize,
    last: usize,
}

/// [`align_fuzzy_with`] at the default threshold.
pub fn align_fuzzy(reference: &str, field_values: &IndexMap<String, String>) -> Result<FuzzyAlignment, LabelError> {
    align_fuzzy_with(reference, field_values, &FuzzyConfig::default())
}

/// Labels `reference` by locating each field value among contiguous token windows.
///
/// Each field takes the window with the smallest normalized edit distance to any of its
/// surface forms (the raw value plus name, journal, month and page renderings). Matches
/// above the threshold are dropped. Overlaps resolve greedily by ascending distance, then
/// longer value, then label name, so the result does not depend on map order.
pub fn align_fuzzy_with(
    reference: &str,
    field_values: &IndexMap<String, String>,
    config: &FuzzyConfig,
) -> Result<FuzzyAlignment, LabelError> {
    let tokens = tokenize(reference);
    if tokens.is_empty() {
        return Err(LabelError::Empty);
    }
    let threshold = config.threshold;
    let mut candidates: Vec<Candidate> = Vec::new();

    for (label, value) in field_values {
        let value_len = value.chars().count();
        for form in surface_forms(label, value) {
            let form_chars: Vec<char> = form.chars().collect();
            let flen = form_chars.len();
            for first in 0..tokens.len() {
                for last in first..tokens.len() {
                    let window: Vec<char> = reference[tokens[first].span.start..tokens[last].span.end]
                        .split_whitespace()
                        .collect::<Vec<_>>()
                        .join(" ")
                        .chars()
                        .collect();
                    let wlen = window.len();
                    let longest = wlen.max(flen);
                    if wlen > flen && (wlen - flen) as f64 > threshold * wlen as f64 {
                        break;
                    }
                    if (flen.saturating_sub(wlen)) as f64 > threshold * longest as f64 {
                        continue;
                    }
                    let max = (threshold * longest as f64).floor() as usize;
                    if let Some(d) = bounded_distance(&window, &form_chars, max) {
                        let distance = d as f64 / longest as f64;
                        if distance <= threshold {
                            candidates.push(Candidate {
                                distance,
                                value_len,
                                label,
                                first,
                                last,
                            });
                        }
                    }
                }
            }
        }
    }

    candidates.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(Reverse(a.value_len).cmp(&Reverse(b.value_len)))
            .then(a.label.cmp(b.label))
            .then(a.first.cmp(&b.first))
            .then(a.last.cmp(&b.last))
    });

    let mut taken = vec![false; tokens.len()];
    let mut matched: Vec<&str> = Vec::new();
    let mut spans = Vec::new();
    for c in &candidates {
        if matched.contains(&c.label) || taken[c.first..=c.last].iter().any(|&t| t) {
            continue;
        }
        taken[c.first..=c.last].iter_mut().for_each(|t| *t = true);
        matched.push(c.label);
        spans.push(MarkedSpan {
            label: c.label.to_string(),
            start: tokens[c.first].span.start,
            end: tokens[c.last].span.end,
        });
    }
    spans.sort_by_key(|s| s.start);

    let (toks, labels) = label_tokens(reference, &spans);
    let mut unmatched: Vec<String> = field_values
        .keys()
        .filter(|k| !matched.contains(&k.as_str()))
        .cloned()
        .collect();
    unmatched.sort();
    Ok(FuzzyAlignment {
        sequence: LabeledSequence::new(toks, labels, Provenance::default())?,
        unmatched,
    })
}
