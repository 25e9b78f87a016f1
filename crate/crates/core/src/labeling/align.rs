use crate::style::{MarkedSpan, MarkedString};

use super::{begin_tag, inside_tag, tokenize, LabelError, LabeledSequence, Provenance, OUTSIDE};

/// Labels tokens from byte spans over `text`.
///
/// A token joins the span holding the most of its bytes, provided that is at least half
/// of them. The first token of each span gets `B-`, the rest `I-`.
pub(crate) fn label_tokens(text: &str, spans: &[MarkedSpan]) -> (Vec<String>, Vec<String>) {
    let tokens = tokenize(text);
    let mut labels = Vec::with_capacity(tokens.len());
    let mut last_span: Option<usize> = None;
    for tok in &tokens {
        let len = tok.span.end - tok.span.start;
        let best = spans
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let overlap = tok.span.end.min(s.end).saturating_sub(tok.span.start.max(s.start));
                (i, overlap)
            })
            .filter(|&(_, overlap)| overlap > 0)
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        match best {
            Some((i, overlap)) if 2 * overlap >= len => {
                let label = &spans[i].label;
                labels.push(if last_span == Some(i) {
                    inside_tag(label)
                } else {
                    begin_tag(label)
                });
                last_span = Some(i);
            }
            _ => {
                labels.push(OUTSIDE.to_string());
                last_span = None;
            }
        }
    }
    (tokens.into_iter().map(|t| t.text).collect(), labels)
}

/// Labels the plain text of `marked` using its sentinel spans.
pub fn align_exact(marked: &MarkedString) -> Result<LabeledSequence, LabelError> {
    let spans = marked.spans()?;
    let plain = marked.strip();
    let (tokens, labels) = label_tokens(&plain, &spans);
    LabeledSequence::new(tokens, labels, Provenance::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::style::{SENTINEL_CLOSE, SENTINEL_LABEL_END, SENTINEL_OPEN};

    fn field(label: &str, value: &str) -> String {
        format!("{SENTINEL_OPEN}{label}{SENTINEL_LABEL_END}{value}{SENTINEL_CLOSE}")
    }

    fn tags(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn worked_example() {
        let m = MarkedString(format!(
            "{}. {}. {}, {}:{}, {}.",
            field("author", "J. Doe and A. Smith"),
            field("title", "A Study of Things"),
            field("journal", "J. of Stuff"),
            field("volume", "4"),
            field("pages", "1\u{2013}10"),
            field("year", "1999"),
        ));
        let s = align_exact(&m).unwrap();
        assert_eq!(
            s.tokens,
            tags(&[
                "J.", "Doe", "and", "A.", "Smith", ".", "A", "Study", "of", "Things", ".", "J.", "of", "Stuff", ",",
                "4", ":", "1\u{2013}10", ",", "1999", "."
            ])
        );
        assert_eq!(
            s.labels,
            tags(&[
                "B-author", "I-author", "I-author", "I-author", "I-author", "O", "B-title", "I-title", "I-title",
                "I-title", "O", "B-journal", "I-journal", "I-journal", "O", "B-volume", "O", "B-pages", "O",
                "B-year", "O"
            ])
        );
    }

    #[test]
    fn no_sentinels_all_outside() {
        let s = align_exact(&MarkedString("plain text, only.".into())).unwrap();
        assert!(s.labels.iter().all(|l| l == "O"));
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn whole_string_one_field() {
        let s = align_exact(&MarkedString(field("title", "A Study of Things"))).unwrap();
        assert_eq!(s.labels, tags(&["B-title", "I-title", "I-title", "I-title"]));
    }

    #[test]
    fn straddling_token_majority() {
        // "pp.12" is one token: 3 bytes outside, 2 inside -> O.
        let s = align_exact(&MarkedString(format!("pp.{}", field("pages", "12")))).unwrap();
        assert_eq!(s.labels, tags(&["O"]));
        // "x12" : 1 outside, 2 inside -> field.
        let s = align_exact(&MarkedString(format!("x{}", field("pages", "12")))).unwrap();
        assert_eq!(s.labels, tags(&["B-pages"]));
        // Exactly half goes to the field.
        let s = align_exact(&MarkedString(format!("ab{}", field("pages", "12")))).unwrap();
        assert_eq!(s.labels, tags(&["B-pages"]));
    }

    #[test]
    fn adjacent_fields_start_new_spans() {
        let s = align_exact(&MarkedString(format!("{} {}", field("volume", "4"), field("number", "2")))).unwrap();
        assert_eq!(s.labels, tags(&["B-volume", "B-number"]));
    }

    #[test]
    fn malformed_markers_error() {
        let m = MarkedString(format!("{SENTINEL_OPEN}title{SENTINEL_LABEL_END}unclosed"));
        assert!(matches!(align_exact(&m), Err(LabelError::Mark(_))));
    }

    #[test]
    fn empty_reference_errors() {
        assert!(matches!(align_exact(&MarkedString("  ".into())), Err(LabelError::Empty)));
    }
}
