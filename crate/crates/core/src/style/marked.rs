use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{SENTINEL_CLOSE, SENTINEL_LABEL_END, SENTINEL_OPEN};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarkError {
    #[error("field opened inside another field at byte {0}")]
    Nested(usize),
    #[error("close marker without an open field at byte {0}")]
    UnmatchedClose(usize),
    #[error("field opened at byte {0} is never closed")]
    Unclosed(usize),
    #[error("label separator missing after open marker at byte {0}")]
    MissingLabelEnd(usize),
    #[error("stray label separator at byte {0}")]
    StrayLabelEnd(usize),
    #[error("empty field label at byte {0}")]
    EmptyLabel(usize),
}

/// A rendered reference with sentinel-delimited field spans.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarkedString(pub String);

/// A piece of a marked string: unlabeled text or one labeled field value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkedSegment {
    Text(String),
    Field { label: String, value: String },
}

/// Byte range of a labeled field within the stripped (plain) text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSpan {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

/// Removes every sentinel and the labels they carry.
pub fn strip_sentinels(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_label = false;
    for c in text.chars() {
        match c {
            SENTINEL_OPEN => in_label = true,
            SENTINEL_LABEL_END => in_label = false,
            SENTINEL_CLOSE => {}
            c if !in_label => out.push(c),
            _ => {}
        }
    }
    out
}

impl MarkedString {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn strip(&self) -> String {
        strip_sentinels(&self.0)
    }

    /// Builds a marked string from segments.
    pub fn from_segments(segments: &[MarkedSegment]) -> Self {
        let mut s = String::new();
        for seg in segments {
            match seg {
                MarkedSegment::Text(t) => s.push_str(t),
                MarkedSegment::Field { label, value } => {
                    s.push(SENTINEL_OPEN);
                    s.push_str(label);
                    s.push(SENTINEL_LABEL_END);
                    s.push_str(value);
                    s.push(SENTINEL_CLOSE);
                }
            }
        }
        MarkedString(s)
    }

    /// Parses into segments, checking that fields are well formed and not nested.
    pub fn segments(&self) -> Result<Vec<MarkedSegment>, MarkError> {
        let mut out = Vec::new();
        let mut text = String::new();
        let mut iter = self.0.char_indices().peekable();
        while let Some((i, c)) = iter.next() {
            match c {
                SENTINEL_OPEN => {
                    if !text.is_empty() {
                        out.push(MarkedSegment::Text(std::mem::take(&mut text)));
                    }
                    let mut label = String::new();
                    let mut found_end = false;
                    for (j, c) in iter.by_ref() {
                        match c {
                            SENTINEL_LABEL_END => {
                                found_end = true;
                                break;
                            }
                            SENTINEL_OPEN => return Err(MarkError::Nested(j)),
                            SENTINEL_CLOSE => return Err(MarkError::MissingLabelEnd(i)),
                            c => label.push(c),
                        }
                    }
                    if !found_end {
                        return Err(MarkError::MissingLabelEnd(i));
                    }
                    if label.is_empty() {
                        return Err(MarkError::EmptyLabel(i));
                    }
                    let mut value = String::new();
                    let mut closed = false;
                    for (j, c) in iter.by_ref() {
                        match c {
                            SENTINEL_CLOSE => {
                                closed = true;
                                break;
                            }
                            SENTINEL_OPEN => return Err(MarkError::Nested(j)),
                            SENTINEL_LABEL_END => return Err(MarkError::StrayLabelEnd(j)),
                            c => value.push(c),
                        }
                    }
                    if !closed {
                        return Err(MarkError::Unclosed(i));
                    }
                    out.push(MarkedSegment::Field { label, value });
                }
                SENTINEL_CLOSE => return Err(MarkError::UnmatchedClose(i)),
                SENTINEL_LABEL_END => return Err(MarkError::StrayLabelEnd(i)),
                c => text.push(c),
            }
        }
        if !text.is_empty() {
            out.push(MarkedSegment::Text(text));
        }
        Ok(out)
    }

    /// Labeled byte ranges in the plain text, in order.
    pub fn spans(&self) -> Result<Vec<MarkedSpan>, MarkError> {
        let mut offset = 0;
        let mut spans = Vec::new();
        for seg in self.segments()? {
            match seg {
                MarkedSegment::Text(t) => offset += t.len(),
                MarkedSegment::Field { label, value } => {
                    spans.push(MarkedSpan {
                        label,
                        start: offset,
                        end: offset + value.len(),
                    });
                    offset += value.len();
                }
            }
        }
        Ok(spans)
    }
}
