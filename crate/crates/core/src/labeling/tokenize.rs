use std::ops::Range;

/// A token and its byte range in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2010}'..='\u{2027}' | '\u{00A1}' | '\u{00A7}' | '\u{00AB}' | '\u{00B6}' | '\u{00B7}' | '\u{00BB}' | '\u{00BF}'
        )
}

/// Punctuation that always forms its own token, even inside a word.
fn always_split(c: char) -> bool {
    matches!(
        c,
        ',' | ';' | ':' | '(' | ')' | '[' | ']' | '{' | '}' | '"' | '!' | '?' | '\u{201C}' | '\u{201D}'
    )
}

/// `J.`: a single uppercase letter followed by one period.
pub(crate) fn is_initial(word: &str) -> bool {
    let mut it = word.chars();
    matches!((it.next(), it.next(), it.next()), (Some(c), Some('.'), None) if c.is_uppercase())
}

fn split_word(word: &str, base: usize, out: &mut Vec<Token>) {
    // Pieces separated by always-split punctuation.
    let mut start = 0;
    for (i, c) in word.char_indices() {
        if always_split(c) {
            if i > start {
                trim_piece(&word[start..i], base + start, out);
            }
            out.push(Token {
                text: c.to_string(),
                span: base + i..base + i + c.len_utf8(),
            });
            start = i + c.len_utf8();
        }
    }
    if start < word.len() {
        trim_piece(&word[start..], base + start, out);
    }
}

/// Detaches leading and trailing punctuation, keeping the period of initials.
fn trim_piece(piece: &str, base: usize, out: &mut Vec<Token>) {
    let mut lo = 0;
    let mut hi = piece.len();
    let mut lead = Vec::new();
    while let Some(c) = piece[lo..hi].chars().next() {
        if !is_punct(c) {
            break;
        }
        lead.push(lo..lo + c.len_utf8());
        lo += c.len_utf8();
    }
    let mut trail = Vec::new();
    while hi > lo {
        let c = piece[lo..hi].chars().next_back().unwrap();
        if !is_punct(c) || (c == '.' && is_initial(&piece[lo..hi])) {
            break;
        }
        trail.push(hi - c.len_utf8()..hi);
        hi -= c.len_utf8();
    }
    for r in lead {
        out.push(Token {
            text: piece[r.clone()].to_string(),
            span: base + r.start..base + r.end,
        });
    }
    if hi > lo {
        out.push(Token {
            text: piece[lo..hi].to_string(),
            span: base + lo..base + hi,
        });
    }
    for r in trail.into_iter().rev() {
        out.push(Token {
            text: piece[r.clone()].to_string(),
            span: base + r.start..base + r.end,
        });
    }
}

/// Splits on whitespace, then separates punctuation.
///
/// Leading and trailing punctuation become single-character tokens, except the period
/// of an initial such as `J.`. Commas, colons, semicolons, brackets and quotes split
/// even inside a word; interior periods, hyphens, dashes and slashes stay.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                split_word(&text[s..i], s, &mut out);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        split_word(&text[s..], s, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn texts(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn keeps_initials() {
        assert_eq!(texts("J. Doe and A. Smith."), ["J.", "Doe", "and", "A.", "Smith", "."]);
    }

    #[test]
    fn volume_pages() {
        assert_eq!(texts("4:1\u{2013}10,"), ["4", ":", "1\u{2013}10", ","]);
    }

    #[test]
    fn single_token() {
        assert_eq!(texts("Title"), ["Title"]);
    }

    #[test]
    fn quotes_and_parens() {
        assert_eq!(texts("\u{201C}Things,\u{201D} (1999)."), ["\u{201C}", "Things", ",", "\u{201D}", "(", "1999", ")", "."]);
        assert_eq!(texts("J.,"), ["J.", ","]);
        assert_eq!(texts("U.S."), ["U.S", "."]);
        assert_eq!(texts("pp. 10.1000/xyz"), ["pp", ".", "10.1000/xyz"]);
    }

    #[test]
    fn lone_punctuation() {
        assert_eq!(texts(". - ."), [".", "-", "."]);
        assert_eq!(texts("..."), [".", ".", "."]);
    }

    #[test]
    fn spans_point_into_text() {
        let text = "Gödel, K. On “things”.";
        for t in tokenize(text) {
            assert_eq!(&text[t.span.clone()], t.text);
        }
    }

    proptest! {
        #[test]
        fn spans_partition_non_whitespace(text in "[A-Za-zé0-9 .,:;()\u{2013}\u{201C}\u{201D}'/-]{0,60}") {
            let toks = tokenize(&text);
            let mut covered = vec![false; text.len()];
            let mut last_end = 0;
            for t in &toks {
                prop_assert!(!t.text.is_empty());
                prop_assert!(t.span.start >= last_end);
                last_end = t.span.end;
                prop_assert_eq!(&text[t.span.clone()], t.text.as_str());
                for b in t.span.clone() {
                    covered[b] = true;
                }
            }
            for (i, c) in text.char_indices() {
                prop_assert_eq!(covered[i], !c.is_whitespace());
            }
        }
    }
}
