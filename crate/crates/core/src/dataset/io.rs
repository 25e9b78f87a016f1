use std::io::{BufRead, Write};

use crate::labeling::{LabeledSequence, Provenance};

use super::DatasetError;

/// One JSON object per line.
pub fn write_jsonl<W: Write>(mut w: W, data: &[LabeledSequence]) -> std::io::Result<()> {
    for s in data {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<LabeledSequence>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| DatasetError::Malformed { line: i + 1, message };
        let seq: LabeledSequence = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        seq.validate().map_err(|e| malformed(e.to_string()))?;
        out.push(seq);
    }
    Ok(out)
}

/// A blank-line separated block of `token TAB label` rows with its `# ` comments.
pub(crate) struct Block {
    pub first_line: usize,
    pub comments: Vec<String>,
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
}

/// Splits tab-separated token/label text into blocks. Lines starting with `# ` are
/// comments; tokens never contain whitespace, so a `#` token cannot be mistaken for one.
pub(crate) fn read_blocks(text: &str) -> Result<Vec<Block>, DatasetError> {
    let mut blocks = Vec::new();
    let mut cur: Option<Block> = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if let Some(b) = cur.take() {
                blocks.push(b);
            }
            continue;
        }
        let b = cur.get_or_insert_with(|| Block {
            first_line: i + 1,
            comments: Vec::new(),
            tokens: Vec::new(),
            labels: Vec::new(),
        });
        if let Some(c) = line.strip_prefix("# ") {
            b.comments.push(c.to_string());
            continue;
        }
        let (tok, label) = line.split_once('\t').ok_or_else(|| DatasetError::Malformed {
            line: i + 1,
            message: "expected `token<TAB>label`".into(),
        })?;
        let label = label.trim();
        if tok.is_empty() || label.is_empty() || label.contains('\t') {
            return Err(DatasetError::Malformed {
                line: i + 1,
                message: "expected `token<TAB>label`".into(),
            });
        }
        b.tokens.push(tok.to_string());
        b.labels.push(label.to_string());
    }
    if let Some(b) = cur {
        blocks.push(b);
    }
    Ok(blocks)
}

/// CoNLL-style export; each block starts with a `# ` comment holding the provenance as JSON.
pub fn write_conll<W: Write>(mut w: W, data: &[LabeledSequence]) -> std::io::Result<()> {
    for (i, s) in data.iter().enumerate() {
        if i > 0 {
            w.write_all(b"\n")?;
        }
        writeln!(w, "# {}", serde_json::to_string(&s.provenance)?)?;
        for (t, l) in s.tokens.iter().zip(&s.labels) {
            writeln!(w, "{t}\t{l}")?;
        }
    }
    w.flush()
}

pub fn read_conll(text: &str) -> Result<Vec<LabeledSequence>, DatasetError> {
    read_blocks(text)?
        .into_iter()
        .filter(|b| !b.tokens.is_empty())
        .map(|b| {
            let provenance = b
                .comments
                .iter()
                .find_map(|c| serde_json::from_str::<Provenance>(c).ok())
                .unwrap_or_default();
            LabeledSequence::new(b.tokens, b.labels, provenance).map_err(|e| DatasetError::Malformed {
                line: b.first_line,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<LabeledSequence> {
        vec![
            LabeledSequence::new(
                vec!["J.".into(), "Doe".into(), "#".into()],
                vec!["B-author".into(), "I-author".into(), "O".into()],
                Provenance {
                    cite_key: "doe99".into(),
                    style_id: "plain".into(),
                    source_id: "dir with space/a.bib".into(),
                    seed: u64::MAX,
                },
            )
            .unwrap(),
            LabeledSequence::new(vec!["x".into()], vec!["O".into()], Provenance::default()).unwrap(),
        ]
    }

    #[test]
    fn jsonl_round_trip() {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &sample()).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 2);
        assert_eq!(read_jsonl(buf.as_slice()).unwrap(), sample());
    }

    #[test]
    fn jsonl_rejects_invalid_bio() {
        let line = r#"{"tokens":["a"],"labels":["I-x"],"cite_key":"","style":"","source":"","seed":0}"#;
        assert!(matches!(read_jsonl(line.as_bytes()), Err(DatasetError::Malformed { line: 1, .. })));
    }

    #[test]
    fn conll_round_trip() {
        let mut buf = Vec::new();
        write_conll(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("J.\tB-author\n"));
        assert_eq!(read_conll(&text).unwrap(), sample());
    }

    #[test]
    fn conll_rejects_missing_tab() {
        assert!(matches!(read_conll("a O\n"), Err(DatasetError::Malformed { line: 1, .. })));
    }
}
