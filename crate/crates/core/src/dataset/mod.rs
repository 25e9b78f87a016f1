//! Corpus generation: pair entries with styles, render, noise, align, split.

mod audit;
mod io;
mod split;
mod stats;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bibtex::BibEntry;
use crate::labeling::{align_exact, inject_noise, LabeledSequence, Provenance};
use crate::style::{render, StyleSpec};

pub use audit::{audit_sample, audit_score, parse_audit, AuditRecord};
pub use io::{read_conll, read_jsonl, write_conll, write_jsonl};
pub use split::{split_by_source, Splits};
pub use stats::{compute_stats, DatasetStats, LabelCount};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{sources} sources cannot fill {splits} nonempty splits")]
    TooFewSources { sources: usize, splits: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How entries are paired with styles and perturbed.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub styles: Vec<StyleSpec>,
    /// Distinct styles drawn per entry.
    pub pairings_per_entry: usize,
    /// Per-site probability of an extraction artifact; 0 disables noise.
    pub noise_rate: f64,
    pub seed: u64,
    /// Train, dev and test shares of the sequences.
    pub split_fractions: [f64; 3],
}

impl GenerationConfig {
    pub fn new(styles: Vec<StyleSpec>, seed: u64) -> Self {
        GenerationConfig {
            styles,
            pairings_per_entry: 1,
            noise_rate: 0.0,
            seed,
            split_fractions: [0.8, 0.1, 0.1],
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: &str| Err(DatasetError::InvalidConfig(m.to_string()));
        if self.styles.is_empty() {
            return bad("no styles");
        }
        if self.pairings_per_entry == 0 {
            return bad("pairings_per_entry must be at least 1");
        }
        if self.pairings_per_entry > self.styles.len() {
            return Err(DatasetError::InvalidConfig(format!(
                "pairings_per_entry {} exceeds the {} available styles",
                self.pairings_per_entry,
                self.styles.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return bad("noise_rate must lie in [0, 1]");
        }
        if self.split_fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return bad("split fractions must lie in [0, 1]");
        }
        if (self.split_fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("split fractions must sum to 1");
        }
        Ok(())
    }
}

/// Generated sequences in (entry, pairing) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub sequences: Vec<LabeledSequence>,
    /// Pairs dropped because the style could not render the entry.
    pub skipped: usize,
    pub diagnostics: Vec<String>,
}

/// Offsets the noise seed from the pairing seed so the two draws differ.
const NOISE_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

fn generate_entry(entry_index: usize, entry: &BibEntry, config: &GenerationConfig) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(entry_index as u64);
    let picks = index::sample(&mut rng, config.styles.len(), config.pairings_per_entry);
    let mut out = Generated {
        sequences: Vec::with_capacity(config.pairings_per_entry),
        skipped: 0,
        diagnostics: Vec::new(),
    };
    for s in picks.iter() {
        let style = &config.styles[s];
        let pair_seed: u64 = rng.random();
        let rendered = match render(entry, style, pair_seed) {
            Ok(r) => r,
            Err(e) => {
                log::debug!("skip: {e}");
                out.skipped += 1;
                continue;
            }
        };
        let labeled = inject_noise(&rendered.marked, pair_seed.wrapping_add(NOISE_SEED_OFFSET), config.noise_rate)
            .map_err(Into::into)
            .and_then(|m| align_exact(&m));
        match labeled {
            Ok(mut seq) => {
                seq.provenance = Provenance {
                    cite_key: entry.cite_key.clone(),
                    style_id: style.id.clone(),
                    source_id: entry.source_id.clone(),
                    seed: pair_seed,
                };
                out.sequences.push(seq);
            }
            Err(e) => {
                out.skipped += 1;
                out.diagnostics
                    .push(format!("{} under {}: {e}", entry.cite_key, style.id));
            }
        }
    }
    out
}

/// Renders every entry under `pairings_per_entry` distinct seeded styles.
///
/// Each entry draws from its own random stream, so output is identical for any
/// `workers` count.
pub fn generate(corpus: &[BibEntry], config: &GenerationConfig, workers: usize) -> Result<Generated, DatasetError> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(DatasetError::EmptyCorpus);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| DatasetError::Pool(e.to_string()))?;
    let parts: Vec<Generated> = pool.install(|| {
        corpus
            .par_iter()
            .enumerate()
            .map(|(i, e)| generate_entry(i, e, config))
            .collect()
    });
    let mut all = Generated {
        sequences: Vec::with_capacity(corpus.len() * config.pairings_per_entry),
        skipped: 0,
        diagnostics: Vec::new(),
    };
    for p in parts {
        all.sequences.extend(p.sequences);
        all.skipped += p.skipped;
        all.diagnostics.extend(p.diagnostics);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bibtex::parse_bib;
    use crate::style::builtin_styles;

    fn corpus(n: usize) -> Vec<BibEntry> {
        let mut text = String::new();
        for i in 0..n {
            text.push_str(&format!(
                "@article{{k{i},\n  author = {{Doe, John and Smith, Anna}},\n  title = {{A Study of Things number {i}}},\n  journal = {{Journal of Stuff}},\n  volume = {{{v}}},\n  pages = {{1--10}},\n  year = {{{y}}}\n}}\n",
                v = i % 40 + 1,
                y = 1950 + i % 70
            ));
        }
        parse_bib(&text, "t.bib", true).unwrap().entries
    }

    #[test]
    fn counts_pairings() {
        let mut config = GenerationConfig::new(builtin_styles(), 7);
        config.pairings_per_entry = 5;
        let out = generate(&corpus(100), &config, 2).unwrap();
        assert_eq!(out.sequences.len() + out.skipped, 500);
        assert_eq!(out.skipped, 0);
        // Styles are drawn without replacement within an entry.
        for chunk in out.sequences.chunks(5) {
            let mut ids: Vec<&str> = chunk.iter().map(|s| s.provenance.style_id.as_str()).collect();
            assert!(chunk.iter().all(|s| s.provenance.cite_key == chunk[0].provenance.cite_key));
            ids.sort();
            ids.dedup();
            assert_eq!(ids.len(), 5);
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut config = GenerationConfig::new(builtin_styles(), 11);
        config.pairings_per_entry = 3;
        config.noise_rate = 0.2;
        let c = corpus(40);
        let a = generate(&c, &config, 1).unwrap();
        let b = generate(&c, &config, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let mut config = GenerationConfig::new(builtin_styles(), 1);
        config.split_fractions = [0.5, 0.5, 0.1];
        assert!(config.validate().is_err());
        config.split_fractions = [1.0, 0.0, 0.0];
        config.pairings_per_entry = 0;
        assert!(config.validate().is_err());
        config.pairings_per_entry = 1;
        config.noise_rate = 1.5;
        assert!(config.validate().is_err());
        assert!(matches!(
            generate(&[], &GenerationConfig::new(builtin_styles(), 1), 1),
            Err(DatasetError::EmptyCorpus)
        ));
    }

    #[test]
    fn skipped_pairs_counted() {
        let entries = parse_bib("@misc{m, note = {only a note}}", "m.bib", true).unwrap().entries;
        let styles: Vec<StyleSpec> = builtin_styles();
        let mut config = GenerationConfig::new(styles.clone(), 3);
        config.pairings_per_entry = styles.len();
        let out = generate(&entries, &config, 1).unwrap();
        assert_eq!(out.sequences.len() + out.skipped, styles.len());
    }
}
