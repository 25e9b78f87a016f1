//! Linear-chain CRF over sparse token features.

mod features;
mod inference;
mod train;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeling::{repair_bio, tokenize, LabelVocab, OUTSIDE};

pub use features::featurize;
pub use inference::Potentials;
pub use train::{train, EpochReport, TrainConfig, Trained};

pub const MODEL_FORMAT: &str = "citeforge-crf";
pub const MODEL_VERSION: u32 = 1;
/// Feature slot shared by every feature string missing from the vocabulary.
pub const UNKNOWN_FEATURE: &str = "<unk>";

#[derive(Debug, Error)]
pub enum CrfError {
    #[error("label index {index} out of range for {num_tags} tags")]
    LabelOutOfRange { index: usize, num_tags: usize },
    #[error("tag `{0}` is not in the model's label vocabulary")]
    UnknownTag(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("not a model file (format `{0}`)")]
    Format(String),
    #[error("model file version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("reading or writing model: {0}")]
    Io(#[from] std::io::Error),
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Feature indices per position plus gold tag indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub features: Vec<Vec<u32>>,
    pub labels: Vec<usize>,
}

/// Source of per-position tag scores. The sparse model is one implementation; any
/// encoder producing `len * num_tags` scores can drive decoding the same way.
pub trait EmissionScorer {
    fn label_vocab(&self) -> &LabelVocab;
    /// Row-major `[tokens.len() * num_tags]` scores.
    fn emission_scores(&self, tokens: &[String]) -> Vec<f64>;
    fn transition(&self) -> &[f64];
    fn start(&self) -> &[f64];
    fn stop(&self) -> &[f64];

    /// Viterbi tags with orphan `I-` repaired.
    fn decode(&self, tokens: &[String]) -> Vec<String> {
        if tokens.is_empty() {
            return Vec::new();
        }
        let emit = self.emission_scores(tokens);
        let vocab = self.label_vocab();
        let p = Potentials {
            len: tokens.len(),
            num_tags: vocab.num_tags(),
            emit: &emit,
            trans: self.transition(),
            start: self.start(),
            stop: self.stop(),
        };
        let mut tags: Vec<String> = p
            .viterbi()
            .0
            .into_iter()
            .map(|i| vocab.tag(i).unwrap_or(OUTSIDE).to_string())
            .collect();
        repair_bio(&mut tags);
        tags
    }
}

/// Weights live in one flat vector:
/// `[emission n_features × n_tags | transition n_tags × n_tags | start n_tags | stop n_tags]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    labels: LabelVocab,
    feature_names: Vec<String>,
    feature_index: HashMap<String, u32>,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    tags: Vec<String>,
    features: Vec<String>,
    params: Vec<f64>,
}

impl CrfModel {
    /// All-zero model. `features` must not contain [`UNKNOWN_FEATURE`], which takes index 0.
    pub fn zeros(labels: LabelVocab, features: impl IntoIterator<Item = String>) -> Self {
        let mut feature_names = vec![UNKNOWN_FEATURE.to_string()];
        feature_names.extend(features.into_iter().filter(|f| f != UNKNOWN_FEATURE));
        let feature_index = feature_names
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i as u32))
            .collect();
        let n = labels.num_tags();
        let len = feature_names.len() * n + n * n + 2 * n;
        CrfModel {
            labels,
            feature_names,
            feature_index,
            params: vec![0.0; len],
        }
    }

    pub fn labels(&self) -> &LabelVocab {
        &self.labels
    }

    pub fn num_tags(&self) -> usize {
        self.labels.num_tags()
    }

    /// Feature count including the unknown slot.
    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn emission_len(&self) -> usize {
        self.feature_names.len() * self.num_tags()
    }

    pub fn emission_weight(&self, feature: u32, tag: usize) -> f64 {
        self.params[feature as usize * self.num_tags() + tag]
    }

    /// Index of a feature string; unknown features map to 0.
    pub fn feature_id(&self, feature: &str) -> u32 {
        self.feature_index.get(feature).copied().unwrap_or(0)
    }

    pub fn encode_features(&self, tokens: &[String]) -> Vec<Vec<u32>> {
        featurize(tokens)
            .iter()
            .map(|fs| fs.iter().map(|f| self.feature_id(f)).collect())
            .collect()
    }

    /// Encodes a gold-labeled sequence; every tag must be in the vocabulary.
    pub fn encode(&self, tokens: &[String], tags: &[String]) -> Result<Encoded, CrfError> {
        let labels = tags
            .iter()
            .map(|t| self.labels.index(t).ok_or_else(|| CrfError::UnknownTag(t.clone())))
            .collect::<Result<_, _>>()?;
        Ok(Encoded {
            features: self.encode_features(tokens),
            labels,
        })
    }

    /// Row-major emission scores for encoded positions.
    pub fn emissions(&self, features: &[Vec<u32>]) -> Vec<f64> {
        let n = self.num_tags();
        let mut out = vec![0.0; features.len() * n];
        for (row, fs) in out.chunks_mut(n).zip(features) {
            for &f in fs {
                let w = &self.params[f as usize * n..(f as usize + 1) * n];
                row.iter_mut().zip(w).for_each(|(r, w)| *r += w);
            }
        }
        out
    }

    pub fn transition_weights(&self) -> &[f64] {
        let n = self.num_tags();
        let off = self.emission_len();
        &self.params[off..off + n * n]
    }

    pub fn start_weights(&self) -> &[f64] {
        let n = self.num_tags();
        let off = self.emission_len() + n * n;
        &self.params[off..off + n]
    }

    pub fn stop_weights(&self) -> &[f64] {
        let n = self.num_tags();
        let off = self.emission_len() + n * n + n;
        &self.params[off..off + n]
    }

    pub fn potentials<'a>(&'a self, emit: &'a [f64]) -> Potentials<'a> {
        Potentials {
            len: emit.len() / self.num_tags(),
            num_tags: self.num_tags(),
            emit,
            trans: self.transition_weights(),
            start: self.start_weights(),
            stop: self.stop_weights(),
        }
    }

    pub fn energy(&self, features: &[Vec<u32>], y: &[usize]) -> Result<f64, CrfError> {
        let n = self.num_tags();
        if let Some(&index) = y.iter().find(|&&l| l >= n) {
            return Err(CrfError::LabelOutOfRange { index, num_tags: n });
        }
        let emit = self.emissions(features);
        Ok(self.potentials(&emit).energy(y))
    }

    pub fn log_partition(&self, features: &[Vec<u32>]) -> f64 {
        let emit = self.emissions(features);
        self.potentials(&emit).log_partition()
    }

    pub fn viterbi(&self, features: &[Vec<u32>]) -> Vec<usize> {
        let emit = self.emissions(features);
        self.potentials(&emit).viterbi().0
    }

    /// Log-likelihood of one sequence with its marginals, for gradient assembly.
    fn sequence_terms(&self, ex: &Encoded) -> (f64, Vec<f64>, Vec<f64>) {
        let emit = self.emissions(&ex.features);
        let p = self.potentials(&emit);
        let (node, edge, log_z) = p.marginals();
        (p.energy(&ex.labels) - log_z, node, edge)
    }

    /// Adds `scale * (observed - expected)` for one sequence into `grad`.
    fn add_sequence_gradient(&self, ex: &Encoded, node: &[f64], edge: &[f64], scale: f64, grad: &mut [f64]) {
        let n = self.num_tags();
        let trans_off = self.emission_len();
        let start_off = trans_off + n * n;
        let stop_off = start_off + n;
        let len = ex.labels.len();
        for (t, fs) in ex.features.iter().enumerate() {
            let y = ex.labels[t];
            let marg = &node[t * n..(t + 1) * n];
            for &f in fs {
                let row = &mut grad[f as usize * n..(f as usize + 1) * n];
                row[y] += scale;
                row.iter_mut().zip(marg).for_each(|(g, p)| *g -= scale * p);
            }
        }
        for w in ex.labels.windows(2) {
            grad[trans_off + w[0] * n + w[1]] += scale;
        }
        for (g, e) in grad[trans_off..start_off].iter_mut().zip(edge) {
            *g -= scale * e;
        }
        grad[start_off + ex.labels[0]] += scale;
        grad[stop_off + ex.labels[len - 1]] += scale;
        for j in 0..n {
            grad[start_off + j] -= scale * node[j];
            grad[stop_off + j] -= scale * node[(len - 1) * n + j];
        }
    }

    /// Mean log-likelihood minus `l2 / 2 * ||w||²`, and its gradient
    /// (observed minus expected counts, minus `l2 * w`).
    pub fn log_likelihood_and_gradient(&self, batch: &[Encoded], l2: f64) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let scale = 1.0 / batch.len() as f64;
        let mut ll = 0.0;
        for ex in batch {
            let (l, node, edge) = self.sequence_terms(ex);
            ll += l * scale;
            self.add_sequence_gradient(ex, &node, &edge, scale, &mut grad);
        }
        let sq: f64 = self.params.iter().map(|w| w * w).sum();
        for (g, w) in grad.iter_mut().zip(&self.params) {
            *g -= l2 * w;
        }
        (ll - 0.5 * l2 * sq, grad)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.file()).expect("model serializes")
    }

    fn file(&self) -> ModelFile {
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            tags: self.labels.tags().to_vec(),
            features: self.feature_names.clone(),
            params: self.params.clone(),
        }
    }

    fn from_file(file: ModelFile) -> Result<Self, CrfError> {
        if file.format != MODEL_FORMAT {
            return Err(CrfError::Format(file.format));
        }
        if file.version != MODEL_VERSION {
            return Err(CrfError::Version {
                found: file.version,
                expected: MODEL_VERSION,
            });
        }
        let labels = LabelVocab::from_tags(&file.tags)
            .ok_or_else(|| CrfError::Corrupt("tag list is not a canonical vocabulary".into()))?;
        if file.features.first().map(String::as_str) != Some(UNKNOWN_FEATURE) {
            return Err(CrfError::Corrupt("feature 0 must be the unknown slot".into()));
        }
        let mut model = CrfModel::zeros(labels, file.features.into_iter().skip(1));
        if model.params.len() != file.params.len() {
            return Err(CrfError::Corrupt(format!(
                "{} weights, expected {}",
                file.params.len(),
                model.params.len()
            )));
        }
        if file.params.iter().any(|w| !w.is_finite()) {
            return Err(CrfError::Corrupt("non-finite weight".into()));
        }
        model.params = file.params;
        Ok(model)
    }

    pub fn from_json(json: &str) -> Result<Self, CrfError> {
        Self::from_file(serde_json::from_str(json)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), CrfError> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, &self.file())?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CrfError> {
        let file: ModelFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        Self::from_file(file)
    }
}

impl EmissionScorer for CrfModel {
    fn label_vocab(&self) -> &LabelVocab {
        &self.labels
    }

    fn emission_scores(&self, tokens: &[String]) -> Vec<f64> {
        self.emissions(&self.encode_features(tokens))
    }

    fn transition(&self) -> &[f64] {
        self.transition_weights()
    }

    fn start(&self) -> &[f64] {
        self.start_weights()
    }

    fn stop(&self) -> &[f64] {
        self.stop_weights()
    }
}

/// A labeled stretch of the input reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSpan {
    pub text: String,
    pub label: String,
}

/// Segments a raw reference string into labeled spans.
pub fn tag<S: EmissionScorer + ?Sized>(reference: &str, model: &S) -> Vec<TaggedSpan> {
    let tokens = tokenize(reference);
    let words: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
    let tags = model.decode(&words);
    let spans = crate::eval::extract_spans(&tags).expect("repaired tags are valid");
    spans
        .into_iter()
        .map(|s| TaggedSpan {
            text: reference[tokens[s.start].span.start..tokens[s.end - 1].span.end].to_string(),
            label: s.label,
        })
        .collect()
}
