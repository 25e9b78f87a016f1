//! TeX-to-Unicode cleanup of raw field values.

use unicode_normalization::UnicodeNormalization;

use crate::style::{SENTINEL_CLOSE, SENTINEL_LABEL_END, SENTINEL_OPEN};

/// Normalizes a brace-balanced BibTeX value.
///
/// Grouping braces are dropped, whitespace runs collapse to one space, accent and
/// ligature commands map to Unicode, unknown commands lose their backslash and braces
/// while keeping argument text. Marker sentinels are removed.
pub fn normalize_value(raw: &str) -> String {
    normalize_value_checked(raw).0
}

/// Like [`normalize_value`], also reporting whether sentinel codepoints were removed.
pub fn normalize_value_checked(raw: &str) -> (String, bool) {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = String::with_capacity(raw.len());
    let mut removed = false;
    let mut pos = 0;
    expand(&chars, &mut pos, chars.len(), &mut out, &mut removed);

    let collapsed = out.split_whitespace().collect::<Vec<_>>().join(" ");
    let dashed = collapse_dashes(&collapsed);
    (dashed.nfc().collect(), removed)
}

fn collapse_dashes(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut run = 0usize;
    let flush = |out: &mut String, run: &mut usize| {
        while *run > 0 {
            match *run {
                1 => {
                    out.push('-');
                    *run = 0;
                }
                2 => {
                    out.push('\u{2013}');
                    *run = 0;
                }
                _ => {
                    out.push('\u{2014}');
                    *run -= 3;
                }
            }
        }
    };
    for c in s.chars() {
        if c == '-' {
            run += 1;
        } else {
            flush(&mut out, &mut run);
            out.push(c);
        }
    }
    flush(&mut out, &mut run);
    out
}

fn is_sentinel(c: char) -> bool {
    c == SENTINEL_OPEN || c == SENTINEL_LABEL_END || c == SENTINEL_CLOSE
}

/// Expands `chars[*pos..end]` into `out`.
fn expand(chars: &[char], pos: &mut usize, end: usize, out: &mut String, removed: &mut bool) {
    while *pos < end {
        let c = chars[*pos];
        match c {
            '\\' => {
                *pos += 1;
                command(chars, pos, end, out, removed);
            }
            '{' | '}' | '$' => *pos += 1,
            '~' => {
                out.push(' ');
                *pos += 1;
            }
            c if is_sentinel(c) => {
                *removed = true;
                *pos += 1;
            }
            c => {
                out.push(c);
                *pos += 1;
            }
        }
    }
}

fn combining_mark(accent: &str) -> Option<char> {
    Some(match accent {
        "'" => '\u{0301}',
        "`" => '\u{0300}',
        "^" => '\u{0302}',
        "\"" => '\u{0308}',
        "~" => '\u{0303}',
        "=" => '\u{0304}',
        "." => '\u{0307}',
        "u" => '\u{0306}',
        "v" => '\u{030C}',
        "H" => '\u{030B}',
        "c" => '\u{0327}',
        "k" => '\u{0328}',
        "r" => '\u{030A}',
        "d" => '\u{0323}',
        "b" => '\u{0331}',
        _ => return None,
    })
}

fn symbol(name: &str) -> Option<&'static str> {
    Some(match name {
        "ss" => "ß",
        "ae" => "æ",
        "AE" => "Æ",
        "oe" => "œ",
        "OE" => "Œ",
        "o" => "ø",
        "O" => "Ø",
        "aa" => "å",
        "AA" => "Å",
        "l" => "ł",
        "L" => "Ł",
        "i" => "ı",
        "j" => "ȷ",
        "ldots" | "dots" | "textellipsis" => "…",
        "textendash" => "\u{2013}",
        "textemdash" => "\u{2014}",
        "S" => "§",
        "P" => "¶",
        "copyright" | "textcopyright" => "©",
        "textregistered" => "®",
        "pounds" => "£",
        "euro" => "€",
        "textquoteleft" => "\u{2018}",
        "textquoteright" => "\u{2019}",
        "relax" | "protect" | "noopsort" | "sortnoop" => "",
        _ => return None,
    })
}

/// Commands whose single braced argument is invisible in typeset output.
fn swallows_argument(name: &str) -> bool {
    matches!(name, "noopsort" | "sortnoop" | "SortNoop" | "NOOP" | "href")
}

fn skip_spaces(chars: &[char], pos: &mut usize, end: usize) {
    while *pos < end && chars[*pos].is_whitespace() {
        *pos += 1;
    }
}

/// Returns the range of a balanced group starting at `*pos` (which must be `{`),
/// advancing past its closing brace.
fn group(chars: &[char], pos: &mut usize, end: usize) -> (usize, usize) {
    let start = *pos + 1;
    let mut depth = 0usize;
    while *pos < end {
        match chars[*pos] {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    let stop = *pos;
                    *pos += 1;
                    return (start, stop);
                }
            }
            _ => {}
        }
        *pos += 1;
    }
    (start, end)
}

/// Reads an accent argument: a braced group, a control word like `\i`, or one char.
fn accent_argument(chars: &[char], pos: &mut usize, end: usize, removed: &mut bool) -> String {
    skip_spaces(chars, pos, end);
    let mut base = String::new();
    if *pos >= end {
        return base;
    }
    if chars[*pos] == '{' {
        let (s, e) = group(chars, pos, end);
        let mut inner = s;
        expand(chars, &mut inner, e, &mut base, removed);
    } else if chars[*pos] == '\\' {
        *pos += 1;
        command(chars, pos, end, &mut base, removed);
    } else {
        base.push(chars[*pos]);
        *pos += 1;
    }
    base
}

fn apply_accent(base: &str, mark: char, out: &mut String) {
    let mut it = base.chars();
    if let Some(first) = it.next() {
        // Dotless bases exist only to carry accents.
        out.push(match first {
            'ı' => 'i',
            'ȷ' => 'j',
            c => c,
        });
        out.push(mark);
        out.extend(it);
    }
}

/// Handles a command; `*pos` points just past the backslash.
fn command(chars: &[char], pos: &mut usize, end: usize, out: &mut String, removed: &mut bool) {
    if *pos >= end {
        return;
    }
    let c = chars[*pos];
    if !c.is_ascii_alphabetic() {
        *pos += 1;
        let s = c.to_string();
        if let Some(mark) = combining_mark(&s) {
            let base = accent_argument(chars, pos, end, removed);
            apply_accent(&base, mark, out);
            return;
        }
        match c {
            '&' | '%' | '#' | '_' | '@' => out.push(c),
            '$' => out.push('$'),
            '\\' | ' ' | ',' | ';' | ':' | '\n' | '\t' => out.push(' '),
            // `\{`, `\}` are dropped so values stay brace-free; `\-` and `\/` are invisible.
            _ => {}
        }
        return;
    }

    let start = *pos;
    while *pos < end && chars[*pos].is_ascii_alphabetic() {
        *pos += 1;
    }
    let name: String = chars[start..*pos].iter().collect();

    if let Some(mark) = combining_mark(&name) {
        let base = accent_argument(chars, pos, end, removed);
        apply_accent(&base, mark, out);
        return;
    }
    if swallows_argument(&name) {
        skip_spaces(chars, pos, end);
        if *pos < end && chars[*pos] == '{' {
            group(chars, pos, end);
        }
        return;
    }
    if let Some(sym) = symbol(&name) {
        // TeX swallows spaces after a control word.
        let mut look = *pos;
        skip_spaces(chars, &mut look, end);
        if look < end && chars[look] == '{' && look + 1 < end && chars[look + 1] == '}' {
            look += 2;
        }
        *pos = look;
        out.push_str(sym);
        return;
    }

    let mut look = *pos;
    skip_spaces(chars, &mut look, end);
    if look < end && chars[look] == '{' {
        // Unknown command with an argument: keep the argument text only.
        *pos = look;
    } else {
        out.push_str(&name);
        if look > *pos {
            out.push(' ');
            *pos = look;
        }
    }
}
