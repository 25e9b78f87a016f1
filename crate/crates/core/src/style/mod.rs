//! Declarative bibliography styles and the marked renderer.

mod cover;
mod marked;
mod names;
mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cover::select_covering_styles;
pub use marked::{strip_sentinels, MarkError, MarkedSegment, MarkedSpan, MarkedString};
pub use names::{abbreviate_names, abbreviate_journal, format_name, format_names, initials};
pub use render::{render, RenderError, Rendered};
pub(crate) use render::{month_name, page_range};

/// Opens a marked field; followed by the label and [`SENTINEL_LABEL_END`].
pub const SENTINEL_OPEN: char = '\u{E000}';
/// Separates the label from the field value.
pub const SENTINEL_LABEL_END: char = '\u{E001}';
/// Closes a marked field.
pub const SENTINEL_CLOSE: char = '\u{E002}';

/// Field labels a style template may reference.
pub const KNOWN_FIELDS: &[&str] = &[
    "author", "year", "title", "pages", "journal", "volume", "booktitle", "number", "publisher",
    "address", "month", "note", "url", "editor", "institution", "series", "school",
    "organization", "howpublished", "type", "doi", "abstract", "edition", "chapter", "key",
    "issn", "isbn", "eprint", "coden", "comment", "day", "issue", "archiveprefix", "eid",
    "keyword", "primaryclass", "location", "lccn", "urldate", "articleno", "date", "numpages",
    "size", "annote", "collaboration", "price", "category", "paper", "city", "advisor",
    "slaccitation", "lastchecked", "intype", "bookeditor", "bookpages", "private",
    "lastaccessed", "translator", "version",
];

/// Fields holding `and`-separated personal names.
pub const NAME_FIELDS: &[&str] = &["author", "editor", "translator", "bookeditor", "advisor"];

#[derive(Debug, Error)]
pub enum StyleError {
    #[error("style `{style}` references unknown field `{field}`")]
    UnknownField { style: String, field: String },
    #[error("style `{style}` has marker codepoints in a prefix or suffix")]
    SentinelInAffix { style: String },
    #[error("style `{style}` has no templates")]
    Empty { style: String },
    #[error("duplicate style id `{0}`")]
    DuplicateId(String),
    #[error("unknown style id `{0}`")]
    UnknownId(String),
    #[error("reading style file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing style file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NameFormat {
    /// "John Doe"
    Full,
    /// "J. Doe"
    InitialsFirst,
    /// "Doe, J."
    InitialsLast,
    /// "Doe, John"
    LastFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Verbatim,
    NameList,
    AbbrevNames,
    MonthName,
    PageRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMarker {
    #[default]
    None,
    BracketNumber,
    AlphaKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDirective {
    pub field: String,
    #[serde(default = "verbatim")]
    pub transform: Transform,
    #[serde(default)]
    pub prefix: String,
    #[serde(default)]
    pub suffix: String,
    #[serde(default)]
    pub required: bool,
}

fn verbatim() -> Transform {
    Transform::Verbatim
}

impl FieldDirective {
    pub fn new(field: &str, transform: Transform, prefix: &str, suffix: &str, required: bool) -> Self {
        FieldDirective {
            field: field.to_string(),
            transform,
            prefix: prefix.to_string(),
            suffix: suffix.to_string(),
            required,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StyleOptions {
    #[serde(default)]
    pub abbrev_journal: bool,
    #[serde(default)]
    pub reference_marker: ReferenceMarker,
    #[serde(default)]
    pub et_al_threshold: Option<usize>,
}

/// A bibliography style: one directive list per entry type, `default` as the fallback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleSpec {
    pub id: String,
    pub name_format: NameFormat,
    #[serde(default)]
    pub options: StyleOptions,
    /// Closing punctuation appended when the last emitted piece lacks it.
    #[serde(default = "default_terminator")]
    pub terminator: String,
    pub templates: BTreeMap<String, Vec<FieldDirective>>,
}

fn default_terminator() -> String {
    ".".to_string()
}

impl StyleSpec {
    /// Set of field labels appearing in any template.
    pub fn covered_fields(&self) -> BTreeSet<String> {
        self.templates
            .values()
            .flatten()
            .map(|d| d.field.clone())
            .collect()
    }

    /// Template for an entry type, falling back to `default`.
    pub fn template(&self, entry_type: &str) -> Option<&[FieldDirective]> {
        self.templates
            .get(entry_type)
            .or_else(|| self.templates.get("default"))
            .map(Vec::as_slice)
    }

    pub fn validate(&self) -> Result<(), StyleError> {
        if self.templates.is_empty() {
            return Err(StyleError::Empty {
                style: self.id.clone(),
            });
        }
        let has_sentinel = |s: &str| {
            s.chars()
                .any(|c| c == SENTINEL_OPEN || c == SENTINEL_LABEL_END || c == SENTINEL_CLOSE)
        };
        for d in self.templates.values().flatten() {
            if !KNOWN_FIELDS.contains(&d.field.as_str()) {
                return Err(StyleError::UnknownField {
                    style: self.id.clone(),
                    field: d.field.clone(),
                });
            }
            if has_sentinel(&d.prefix) || has_sentinel(&d.suffix) {
                return Err(StyleError::SentinelInAffix {
                    style: self.id.clone(),
                });
            }
        }
        if has_sentinel(&self.terminator) {
            return Err(StyleError::SentinelInAffix {
                style: self.id.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StyleFile {
    styles: Vec<StyleSpec>,
}

/// Parses a style-definition JSON document: `{"styles": [StyleSpec, ...]}`.
pub fn styles_from_json(json: &str) -> Result<Vec<StyleSpec>, StyleError> {
    let file: StyleFile = serde_json::from_str(json)?;
    let mut ids = BTreeSet::new();
    for s in &file.styles {
        s.validate()?;
        if !ids.insert(s.id.clone()) {
            return Err(StyleError::DuplicateId(s.id.clone()));
        }
    }
    Ok(file.styles)
}

pub fn styles_to_json(styles: &[StyleSpec]) -> String {
    serde_json::to_string_pretty(&StyleFile {
        styles: styles.to_vec(),
    })
    .expect("styles serialize")
}

pub fn load_styles(path: &Path) -> Result<Vec<StyleSpec>, StyleError> {
    styles_from_json(&std::fs::read_to_string(path)?)
}

const BUILTIN_JSON: &str = include_str!("builtin.json");

/// The styles shipped with the crate.
pub fn builtin_styles() -> Vec<StyleSpec> {
    styles_from_json(BUILTIN_JSON).expect("built-in styles are valid")
}

/// Looks up styles by id, preserving the requested order.
pub fn pick_styles(all: &[StyleSpec], ids: &[String]) -> Result<Vec<StyleSpec>, StyleError> {
    ids.iter()
        .map(|id| {
            all.iter()
                .find(|s| &s.id == id)
                .cloned()
                .ok_or_else(|| StyleError::UnknownId(id.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load_and_validate() {
        let styles = builtin_styles();
        assert!(styles.len() >= 10);
        for s in &styles {
            s.validate().unwrap();
            assert!(s.template("article").is_some(), "{} lacks article", s.id);
            assert!(s.template("no-such-type").is_some(), "{} lacks default", s.id);
        }
    }

    #[test]
    fn json_round_trip() {
        let styles = builtin_styles();
        let again = styles_from_json(&styles_to_json(&styles)).unwrap();
        assert_eq!(styles, again);
    }

    #[test]
    fn rejects_unknown_field() {
        let json = r#"{"styles":[{"id":"x","name_format":"full","templates":{"default":[{"field":"bogus"}]}}]}"#;
        assert!(matches!(styles_from_json(json), Err(StyleError::UnknownField { .. })));
    }

    #[test]
    fn rejects_sentinel_affix() {
        let json = "{\"styles\":[{\"id\":\"x\",\"name_format\":\"full\",\"templates\":{\"default\":[{\"field\":\"title\",\"suffix\":\"\u{E002}\"}]}}]}";
        assert!(matches!(styles_from_json(json), Err(StyleError::SentinelInAffix { .. })));
    }

    #[test]
    fn directive_defaults() {
        let json = r#"{"styles":[{"id":"x","name_format":"last-first","templates":{"default":[{"field":"title"}]}}]}"#;
        let s = &styles_from_json(json).unwrap()[0];
        let d = &s.templates["default"][0];
        assert_eq!(d.transform, Transform::Verbatim);
        assert!(!d.required);
        assert_eq!(s.terminator, ".");
        assert_eq!(s.options.reference_marker, ReferenceMarker::None);
    }

    #[test]
    fn covered_fields_union() {
        let styles = builtin_styles();
        let abbrv = styles.iter().find(|s| s.id == "abbrv").unwrap();
        let covered = abbrv.covered_fields();
        for f in ["author", "title", "journal", "year", "booktitle", "publisher"] {
            assert!(covered.contains(f));
        }
    }
}
