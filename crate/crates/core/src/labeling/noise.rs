use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::style::{MarkError, MarkedSegment, MarkedString};

const MIN_SPLIT_LEN: usize = 8;

fn is_vowel(c: char) -> bool {
    matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Break point for a long word: after the first vowel-consonant boundary, leaving
/// at least three letters on each side.
fn split_point(word: &[char]) -> usize {
    let n = word.len();
    (3..=n - 3)
        .find(|&p| is_vowel(word[p - 1]) && !is_vowel(word[p]))
        .unwrap_or(n / 2)
}

fn noise_word(word: &[char], rng: &mut ChaCha8Rng, rate: f64, out: &mut String) {
    let mut i = 0;
    while i < word.len() {
        if !word[i].is_alphabetic() {
            out.push(word[i]);
            i += 1;
            continue;
        }
        let start = i;
        while i < word.len() && word[i].is_alphabetic() {
            i += 1;
        }
        let run = &word[start..i];
        if run.len() < MIN_SPLIT_LEN {
            out.extend(run);
            continue;
        }
        let p = split_point(run);
        if rng.random::<f64>() < rate {
            // Hyphenated across a line break.
            out.extend(&run[..p]);
            out.push_str("- ");
            out.extend(&run[p..]);
        } else if rng.random::<f64>() < rate {
            // Line break inside the word, extracted as a space.
            out.extend(&run[..p]);
            out.push(' ');
            out.extend(&run[p..]);
        } else {
            out.extend(run);
        }
    }
}

fn noise_text(text: &str, rng: &mut ChaCha8Rng, rate: f64) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len() + 8);
    let mut i = 0;
    while i < chars.len() {
        let start = i;
        let ws = chars[i].is_whitespace();
        while i < chars.len() && chars[i].is_whitespace() == ws {
            i += 1;
        }
        let run = &chars[start..i];
        if ws {
            out.extend(run);
            if rng.random::<f64>() < rate {
                out.extend(run);
            }
        } else {
            noise_word(run, rng, rate, &mut out);
        }
    }
    out
}

/// Simulates text-extraction artifacts on a marked reference.
///
/// Each site is hit with probability `rate`: words of eight or more letters are
/// hyphen-split (`Proceedings` → `Pro- ceedings`) or broken by a space, and whitespace
/// runs are doubled. Field boundaries and labels are preserved; only text changes.
pub fn inject_noise(marked: &MarkedString, seed: u64, rate: f64) -> Result<MarkedString, MarkError> {
    let rate = rate.clamp(0.0, 1.0);
    let segments = marked.segments()?;
    if rate == 0.0 {
        return Ok(marked.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy: Vec<MarkedSegment> = segments
        .into_iter()
        .map(|seg| match seg {
            MarkedSegment::Text(t) => MarkedSegment::Text(noise_text(&t, &mut rng, rate)),
            MarkedSegment::Field { label, value } => MarkedSegment::Field {
                label,
                value: noise_text(&value, &mut rng, rate),
            },
        })
        .collect();
    Ok(MarkedString::from_segments(&noisy))
}
