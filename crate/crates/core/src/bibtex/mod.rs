//! BibTeX ingestion: parsing, macro expansion, value normalization and name splitting.

mod names;
mod normalize;
mod parser;

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use names::{parse_names, Name};
pub use normalize::{normalize_value, normalize_value_checked};
pub use parser::{parse_bib, parse_bib_bytes, parse_bib_bytes_with, parse_bib_with};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BibError {
    #[error("line {line}: unbalanced braces")]
    UnbalancedBraces { line: usize },
    #[error("line {line}: duplicate field `{field}` in entry `{key}`")]
    DuplicateField {
        line: usize,
        key: String,
        field: String,
    },
    #[error("line {line}: undefined macro `{name}`")]
    UndefinedMacro { line: usize, name: String },
    #[error("line {line}: cyclic macro definition involving `{name}`")]
    CyclicMacro { line: usize, name: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("empty name in `{value}`")]
    EmptyName { value: String },
}

/// A non-fatal note produced while parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// One parsed BibTeX record with normalized field values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibEntry {
    pub entry_type: String,
    pub cite_key: String,
    pub fields: IndexMap<String, String>,
    pub source_id: String,
}

impl BibEntry {
    pub fn get(&self, field: &str) -> Option<&str> {
        self.fields.get(field).map(String::as_str)
    }

    /// Serializes the entry back to BibTeX. Re-parsing the output yields an equal entry.
    pub fn to_bibtex(&self) -> String {
        let mut out = format!("@{}{{{},\n", self.entry_type, self.cite_key);
        for (name, value) in &self.fields {
            out.push_str("  ");
            out.push_str(name);
            out.push_str(" = {");
            for c in value.chars() {
                if c == '$' {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push_str("},\n");
        }
        out.push_str("}\n");
        out
    }
}

/// `@string` definitions, keyed case-insensitively.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MacroTable {
    macros: HashMap<String, String>,
}

impl MacroTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The table BibTeX styles predefine: three-letter month names.
    pub fn with_months() -> Self {
        let mut t = Self::new();
        for (abbr, full) in MONTHS {
            t.insert(abbr, full);
        }
        t
    }

    pub fn insert(&mut self, name: &str, expansion: &str) {
        self.macros.insert(name.to_ascii_lowercase(), expansion.to_string());
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.macros.get(&name.to_ascii_lowercase()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.macros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.macros.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.macros.keys().map(String::as_str)
    }
}

pub(crate) const MONTHS: [(&str, &str); 12] = [
    ("jan", "January"),
    ("feb", "February"),
    ("mar", "March"),
    ("apr", "April"),
    ("may", "May"),
    ("jun", "June"),
    ("jul", "July"),
    ("aug", "August"),
    ("sep", "September"),
    ("oct", "October"),
    ("nov", "November"),
    ("dec", "December"),
];

/// Result of parsing one `.bib` text.
#[derive(Debug, Clone, Default)]
pub struct ParsedBib {
    pub entries: Vec<BibEntry>,
    /// User `@string` definitions (the predefined month macros are not included).
    pub macros: MacroTable,
    pub diagnostics: Vec<ParseDiagnostic>,
}
