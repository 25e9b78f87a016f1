use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bibtex::{parse_names, BibEntry, MONTHS};

use super::marked::{MarkedSegment, MarkedString};
use super::names::{abbreviate_journal, abbreviate_names, format_names};
use super::{FieldDirective, ReferenceMarker, StyleSpec, Transform, SENTINEL_CLOSE, SENTINEL_LABEL_END, SENTINEL_OPEN};

/// Reasons an (entry, style) pair produces no reference. All of them mean "skip this pair".
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("style `{style}` requires `{field}`, which `{key}` lacks")]
    MissingRequired {
        style: String,
        key: String,
        field: String,
    },
    #[error("style `{style}` has no template for `{entry_type}`")]
    NoTemplate { style: String, entry_type: String },
    #[error("style `{style}` renders none of the fields of `{key}`")]
    NothingToRender { style: String, key: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub plain: String,
    pub marked: MarkedString,
}

pub(crate) fn month_name(value: &str) -> String {
    let lower = value.trim().to_lowercase();
    if let Ok(n) = lower.parse::<usize>() {
        if (1..=12).contains(&n) {
            return MONTHS[n - 1].1.to_string();
        }
    }
    if lower.len() >= 3 {
        if let Some((_, full)) = MONTHS.iter().find(|(abbr, _)| lower.starts_with(abbr)) {
            return full.to_string();
        }
    }
    value.to_string()
}

/// Joins page numbers with an en dash: "1-10", "1--10" → "1–10".
pub(crate) fn page_range(value: &str) -> String {
    let chars: Vec<char> = value.chars().collect();
    let mut out = String::with_capacity(value.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '-' || c == '\u{2013}' {
            let mut j = i;
            while j < chars.len() && (chars[j] == '-' || chars[j] == '\u{2013}') {
                j += 1;
            }
            let before = i > 0 && chars[i - 1].is_alphanumeric();
            let after = j < chars.len() && chars[j].is_alphanumeric();
            if before && after {
                out.push('\u{2013}');
            } else {
                out.extend(&chars[i..j]);
            }
            i = j;
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

fn apply(d: &FieldDirective, value: &str, style: &StyleSpec) -> String {
    let et_al = style.options.et_al_threshold;
    match d.transform {
        Transform::Verbatim if d.field == "journal" && style.options.abbrev_journal => abbreviate_journal(value),
        Transform::Verbatim => value.to_string(),
        Transform::NameList => match parse_names(value) {
            Ok(names) if !names.is_empty() => format_names(&names, style.name_format, et_al),
            _ => value.to_string(),
        },
        Transform::AbbrevNames => match parse_names(value) {
            Ok(names) if !names.is_empty() => abbreviate_names(&names, et_al),
            _ => value.to_string(),
        },
        Transform::MonthName => month_name(value),
        Transform::PageRange => page_range(value),
    }
}

fn alpha_key(entry: &BibEntry) -> String {
    let names = entry
        .get("author")
        .or_else(|| entry.get("editor"))
        .and_then(|v| parse_names(v).ok())
        .unwrap_or_default();
    let lasts: Vec<String> = names
        .iter()
        .filter(|n| !n.is_others())
        .map(|n| n.last.chars().filter(|c| c.is_alphanumeric()).collect::<String>())
        .filter(|l| !l.is_empty())
        .collect();
    let mut key = match lasts.len() {
        0 => entry.cite_key.chars().filter(|c| c.is_alphanumeric()).take(3).collect(),
        1 => lasts[0].chars().take(3).collect(),
        2..=4 => lasts.iter().filter_map(|l| l.chars().next()).collect(),
        _ => {
            let mut k: String = lasts.iter().take(3).filter_map(|l| l.chars().next()).collect();
            k.push('+');
            k
        }
    };
    if let Some(year) = entry.get("year") {
        let digits: Vec<char> = year.chars().filter(char::is_ascii_digit).collect();
        if digits.len() >= 2 {
            key.extend(&digits[digits.len() - 2..]);
        }
    }
    key
}

fn ends_sentence(s: &str) -> bool {
    s.ends_with(['.', '?', '!'])
}

/// Drops a leading period from `gap` when `prev` already ends a sentence.
fn dedupe_period(prev: &str, gap: &mut String) {
    if ends_sentence(prev) && gap.starts_with('.') {
        gap.remove(0);
    }
}

fn clean_value(v: &str) -> String {
    v.chars()
        .filter(|&c| c != SENTINEL_OPEN && c != SENTINEL_LABEL_END && c != SENTINEL_CLOSE)
        .collect()
}

/// Renders `entry` under `style`.
///
/// Fields follow template order. A missing optional field disappears together with
/// its prefix and suffix; a missing required field skips the pair. `options_seed`
/// drives the randomized typesetting options (currently the reference number).
pub fn render(entry: &BibEntry, style: &StyleSpec, options_seed: u64) -> Result<Rendered, RenderError> {
    let template = style.template(&entry.entry_type).ok_or_else(|| RenderError::NoTemplate {
        style: style.id.clone(),
        entry_type: entry.entry_type.clone(),
    })?;

    let mut gap = match style.options.reference_marker {
        ReferenceMarker::None => String::new(),
        ReferenceMarker::BracketNumber => {
            let n: u32 = ChaCha8Rng::seed_from_u64(options_seed).random_range(1..=99);
            format!("[{n}] ")
        }
        ReferenceMarker::AlphaKey => format!("[{}] ", alpha_key(entry)),
    };

    let mut segments = Vec::new();
    let mut prev: Option<String> = None;
    for d in template {
        let value = entry
            .get(&d.field)
            .map(|raw| clean_value(&apply(d, raw, style)))
            .filter(|v| !v.trim().is_empty());
        let Some(value) = value else {
            if d.required {
                return Err(RenderError::MissingRequired {
                    style: style.id.clone(),
                    key: entry.cite_key.clone(),
                    field: d.field.clone(),
                });
            }
            continue;
        };
        match &prev {
            Some(p) => {
                gap.push_str(&d.prefix);
                dedupe_period(p, &mut gap);
            }
            None => gap.push_str(d.prefix.trim_start_matches([',', ';', ':', '.', ' '])),
        }
        if !gap.is_empty() {
            segments.push(MarkedSegment::Text(std::mem::take(&mut gap)));
        }
        segments.push(MarkedSegment::Field {
            label: d.field.clone(),
            value: value.clone(),
        });
        gap = d.suffix.clone();
        prev = Some(value);
    }

    let Some(prev) = prev else {
        return Err(RenderError::NothingToRender {
            style: style.id.clone(),
            key: entry.cite_key.clone(),
        });
    };
    let mut tail = gap.trim_end_matches([',', ';', ':', ' ']).to_string();
    dedupe_period(&prev, &mut tail);
    let closing = if tail.is_empty() { prev.as_str() } else { tail.as_str() };
    if !ends_sentence(closing) {
        tail.push_str(&style.terminator);
    }
    if !tail.is_empty() {
        segments.push(MarkedSegment::Text(tail));
    }

    let marked = MarkedString::from_segments(&segments);
    Ok(Rendered {
        plain: marked.strip(),
        marked,
    })
}
