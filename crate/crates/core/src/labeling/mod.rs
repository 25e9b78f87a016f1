//! From rendered references to BIO-labeled token sequences.

mod align;
mod fuzzy;
mod noise;
mod tokenize;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::style::MarkError;

pub use align::align_exact;
pub use fuzzy::{align_fuzzy, align_fuzzy_with, edit_distance, normalized_edit_distance, FuzzyAlignment, FuzzyConfig};
pub use noise::inject_noise;
pub use tokenize::{tokenize, Token};
pub(crate) use tokenize::is_initial;

/// Tag for tokens outside every field.
pub const OUTSIDE: &str = "O";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error(transparent)]
    Mark(#[from] MarkError),
    #[error("reference has no tokens")]
    Empty,
    #[error("{tokens} tokens but {labels} labels")]
    LengthMismatch { tokens: usize, labels: usize },
    #[error("empty token at position {0}")]
    EmptyToken(usize),
    #[error("malformed tag `{tag}` at position {position}")]
    BadTag { position: usize, tag: String },
    #[error("`{tag}` at position {position} does not continue a span of the same field")]
    OrphanInside { position: usize, tag: String },
}

/// Where a labeled reference came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub cite_key: String,
    #[serde(rename = "style")]
    pub style_id: String,
    #[serde(rename = "source")]
    pub source_id: String,
    pub seed: u64,
}

/// Tokens with one BIO tag each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSequence {
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
    #[serde(flatten)]
    pub provenance: Provenance,
}

/// A parsed BIO tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

impl<'a> Tag<'a> {
    pub fn parse(tag: &'a str) -> Option<Tag<'a>> {
        if tag == OUTSIDE {
            return Some(Tag::Outside);
        }
        let (kind, field) = tag.split_once('-')?;
        if field.is_empty() {
            return None;
        }
        match kind {
            "B" => Some(Tag::Begin(field)),
            "I" => Some(Tag::Inside(field)),
            _ => None,
        }
    }

    pub fn field(&self) -> Option<&'a str> {
        match *self {
            Tag::Outside => None,
            Tag::Begin(f) | Tag::Inside(f) => Some(f),
        }
    }
}

pub fn begin_tag(field: &str) -> String {
    format!("B-{field}")
}

pub fn inside_tag(field: &str) -> String {
    format!("I-{field}")
}

/// Checks that every tag parses and every `I-f` follows `B-f` or `I-f`.
pub fn check_bio(labels: &[String]) -> Result<(), LabelError> {
    let mut open: Option<&str> = None;
    for (position, tag) in labels.iter().enumerate() {
        let parsed = Tag::parse(tag).ok_or_else(|| LabelError::BadTag {
            position,
            tag: tag.clone(),
        })?;
        match parsed {
            Tag::Outside => open = None,
            Tag::Begin(f) => open = Some(f),
            Tag::Inside(f) => {
                if open != Some(f) {
                    return Err(LabelError::OrphanInside {
                        position,
                        tag: tag.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Rewrites each orphan `I-f` as `B-f`.
pub fn repair_bio(labels: &mut [String]) {
    let mut open: Option<String> = None;
    for tag in labels.iter_mut() {
        match Tag::parse(tag) {
            Some(Tag::Begin(f)) => open = Some(f.to_string()),
            Some(Tag::Inside(f)) => {
                if open.as_deref() != Some(f) {
                    let f = f.to_string();
                    *tag = begin_tag(&f);
                    open = Some(f);
                }
            }
            _ => open = None,
        }
    }
}

impl LabeledSequence {
    pub fn new(tokens: Vec<String>, labels: Vec<String>, provenance: Provenance) -> Result<Self, LabelError> {
        let s = LabeledSequence {
            tokens,
            labels,
            provenance,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn validate(&self) -> Result<(), LabelError> {
        if self.tokens.is_empty() {
            return Err(LabelError::Empty);
        }
        if self.tokens.len() != self.labels.len() {
            return Err(LabelError::LengthMismatch {
                tokens: self.tokens.len(),
                labels: self.labels.len(),
            });
        }
        if let Some(i) = self.tokens.iter().position(String::is_empty) {
            return Err(LabelError::EmptyToken(i));
        }
        check_bio(&self.labels)
    }
}

/// Field labels plus `O`, mapped to dense tag indices.
///
/// Index 0 is always `O`; each field `f` (sorted) then gets `B-f` and `I-f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVocab {
    fields: Vec<String>,
    tags: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelVocab {
    pub fn new<I, S>(fields: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let fields: Vec<String> = fields
            .into_iter()
            .map(Into::into)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut tags = vec![OUTSIDE.to_string()];
        for f in &fields {
            tags.push(begin_tag(f));
            tags.push(inside_tag(f));
        }
        let index = tags.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        LabelVocab { fields, tags, index }
    }

    /// Vocabulary of every field tagged in `data`.
    pub fn from_sequences<'a>(data: impl IntoIterator<Item = &'a LabeledSequence>) -> Self {
        let fields: BTreeSet<String> = data
            .into_iter()
            .flat_map(|s| s.labels.iter())
            .filter_map(|t| Tag::parse(t).and_then(|t| t.field()).map(str::to_string))
            .collect();
        Self::new(fields)
    }

    /// Rebuilds a vocabulary from its tag list, which must be in canonical order.
    pub fn from_tags(tags: &[String]) -> Option<Self> {
        let fields: Vec<String> = tags
            .iter()
            .filter_map(|t| match Tag::parse(t) {
                Some(Tag::Begin(f)) => Some(f.to_string()),
                _ => None,
            })
            .collect();
        let v = Self::new(fields);
        (v.tags == tags).then_some(v)
    }

    pub fn fields(&self) -> &[String] {
        &self.fields
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn num_tags(&self) -> usize {
        self.tags.len()
    }

    pub fn index(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }

    pub fn tag(&self, index: usize) -> Option<&str> {
        self.tags.get(index).map(String::as_str)
    }
}
