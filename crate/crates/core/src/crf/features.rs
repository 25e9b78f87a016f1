use crate::labeling::is_initial;

const POSITION_BUCKETS: usize = 10;

fn shape(token: &str) -> String {
    token
        .chars()
        .map(|c| {
            if c.is_uppercase() {
                'X'
            } else if c.is_lowercase() {
                'x'
            } else if c.is_numeric() {
                'd'
            } else {
                c
            }
        })
        .collect()
}

/// Shape with runs of the same class collapsed: `Smith` → `Xx`.
fn short_shape(token: &str) -> String {
    let mut out = String::new();
    for c in shape(token).chars() {
        if !out.ends_with(c) {
            out.push(c);
        }
    }
    out
}

fn prefix(chars: &[char], n: usize) -> String {
    chars[..n.min(chars.len())].iter().collect()
}

fn suffix(chars: &[char], n: usize) -> String {
    chars[chars.len().saturating_sub(n)..].iter().collect()
}

fn is_year_like(token: &str) -> bool {
    token.len() == 4
        && token.bytes().all(|b| b.is_ascii_digit())
        && token.parse::<u32>().is_ok_and(|y| (1800..=2099).contains(&y))
}

/// Sparse string features for every position of a token sequence.
pub fn featurize(tokens: &[String]) -> Vec<Vec<String>> {
    let n = tokens.len();
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let shapes: Vec<String> = tokens.iter().map(|t| short_shape(t)).collect();
    (0..n)
        .map(|t| {
            let tok = &tokens[t];
            let chars: Vec<char> = lower[t].chars().collect();
            let mut f = vec![
                "bias".to_string(),
                format!("w={}", lower[t]),
                format!("shape={}", shape(tok)),
                format!("sshape={}", shapes[t]),
                format!("p3={}", prefix(&chars, 3)),
                format!("p4={}", prefix(&chars, 4)),
                format!("s3={}", suffix(&chars, 3)),
                format!("s4={}", suffix(&chars, 4)),
            ];
            if tok.chars().all(|c| c.is_ascii_digit()) {
                f.push("digit".to_string());
            }
            if is_year_like(tok) {
                f.push("year".to_string());
            }
            if is_initial(tok) {
                f.push("initial".to_string());
            }
            if t == 0 {
                f.push("pos=first".to_string());
            }
            if t + 1 == n {
                f.push("pos=last".to_string());
            }
            if t != 0 && t + 1 != n {
                f.push("pos=other".to_string());
            }
            f.push(format!("rel={}", t * POSITION_BUCKETS / n));
            match t.checked_sub(1) {
                Some(p) => {
                    f.push(format!("prev={}", lower[p]));
                    f.push(format!("prevshape={}", shapes[p]));
                }
                None => f.push("prev=<s>".to_string()),
            }
            match lower.get(t + 1) {
                Some(next) => {
                    f.push(format!("next={next}"));
                    f.push(format!("nextshape={}", shapes[t + 1]));
                }
                None => f.push("next=</s>".to_string()),
            }
            f
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn year_token() {
        let f = &featurize(&toks(&["In", "1999", "."]))[1];
        assert!(f.contains(&"shape=dddd".to_string()));
        assert!(f.contains(&"year".to_string()));
        assert!(f.contains(&"digit".to_string()));
        assert!(f.contains(&"prev=in".to_string()));
        assert!(f.contains(&"next=.".to_string()));
        assert!(!featurize(&toks(&["2150"]))[0].contains(&"year".to_string()));
    }

    #[test]
    fn initial_token() {
        let f = &featurize(&toks(&["J.", "Doe"]))[0];
        assert!(f.contains(&"initial".to_string()));
        assert!(f.contains(&"shape=X.".to_string()));
    }

    #[test]
    fn single_token_is_first_and_last() {
        let f = &featurize(&toks(&["Title"]))[0];
        assert!(f.contains(&"pos=first".to_string()));
        assert!(f.contains(&"pos=last".to_string()));
        assert!(!f.contains(&"pos=other".to_string()));
        assert!(f.contains(&"prev=<s>".to_string()));
        assert!(f.contains(&"next=</s>".to_string()));
    }

    #[test]
    fn affixes_and_shapes() {
        let f = &featurize(&toks(&["Smithson"]))[0];
        for want in ["p3=smi", "p4=smit", "s3=son", "s4=hson", "sshape=Xx", "w=smithson"] {
            assert!(f.contains(&want.to_string()), "{want}");
        }
    }
}
