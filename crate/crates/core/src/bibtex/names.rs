use serde::{Deserialize, Serialize};

use super::BibError;

/// One personal name split into the four BibTeX parts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Name {
    pub first: String,
    pub von: String,
    pub last: String,
    pub jr: String,
}

impl Name {
    pub fn new(first: &str, von: &str, last: &str, jr: &str) -> Self {
        Name {
            first: first.to_string(),
            von: von.to_string(),
            last: last.to_string(),
            jr: jr.to_string(),
        }
    }

    /// The `and others` placeholder that styles render as "et al.".
    pub fn is_others(&self) -> bool {
        self.last == "others" && self.first.is_empty() && self.von.is_empty() && self.jr.is_empty()
    }

    /// Parts in "First von Last Jr" order, joined by single spaces.
    pub fn to_words(&self) -> String {
        [&self.first, &self.von, &self.last, &self.jr]
            .iter()
            .filter(|p| !p.is_empty())
            .map(|p| p.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Splits `s` on whitespace at brace depth 0, keeping depth-0 commas as their own words.
fn words(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '{' => {
                depth += 1;
                cur.push(c);
            }
            '}' => {
                depth -= 1;
                cur.push(c);
            }
            ',' if depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(",".to_string());
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// True when the first letter outside braces is lowercase. Fully braced words count as uppercase.
fn is_von_word(word: &str) -> bool {
    let mut depth = 0i32;
    for c in word.chars() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            c if c.is_alphabetic() => {
                return depth == 0 && c.is_lowercase();
            }
            _ => {}
        }
    }
    false
}

fn join(ws: &[String]) -> String {
    ws.join(" ")
}

fn parse_one(ws: &[String], whole: &str) -> Result<Name, BibError> {
    let parts: Vec<Vec<String>> = ws
        .split(|w| w == ",")
        .map(|p| p.to_vec())
        .collect();
    let empty = || BibError::EmptyName {
        value: whole.to_string(),
    };

    match parts.len() {
        1 => {
            let w = &parts[0];
            let n = w.len();
            if n == 0 {
                return Err(empty());
            }
            let von_start = (0..n - 1).find(|&i| is_von_word(&w[i]));
            match von_start {
                Some(i) => {
                    let j = (i..n - 1).rev().find(|&k| is_von_word(&w[k])).unwrap_or(i);
                    Ok(Name {
                        first: join(&w[..i]),
                        von: join(&w[i..=j]),
                        last: join(&w[j + 1..]),
                        jr: String::new(),
                    })
                }
                None => Ok(Name {
                    first: join(&w[..n - 1]),
                    von: String::new(),
                    last: w[n - 1].clone(),
                    jr: String::new(),
                }),
            }
        }
        _ => {
            let head = &parts[0];
            if head.is_empty() {
                return Err(empty());
            }
            let (von, last) = split_von_last(head);
            let (jr, first) = if parts.len() == 2 {
                (String::new(), join(&parts[1]))
            } else {
                let rest: Vec<String> = parts[2..].iter().map(|p| join(p)).collect();
                (join(&parts[1]), rest.join(", "))
            };
            Ok(Name {
                first,
                von,
                last,
                jr,
            })
        }
    }
}

fn split_von_last(w: &[String]) -> (String, String) {
    let n = w.len();
    if n > 1 && is_von_word(&w[0]) {
        let j = (0..n - 1).rev().find(|&k| is_von_word(&w[k])).unwrap_or(0);
        (join(&w[..=j]), join(&w[j + 1..]))
    } else {
        (String::new(), join(w))
    }
}

/// Parses an `and`-separated name list using the BibTeX name grammar.
///
/// Accepts "First von Last", "von Last, First" and "von Last, Jr, First".
/// Blank input yields an empty list; an empty name between two `and`s is an error.
pub fn parse_names(value: &str) -> Result<Vec<Name>, BibError> {
    let ws = words(value);
    if ws.is_empty() {
        return Ok(Vec::new());
    }
    ws.split(|w| w.eq_ignore_ascii_case("and"))
        .map(|group| parse_one(group, value))
        .collect()
}
