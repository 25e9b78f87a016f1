use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eval::score_tags;
use crate::labeling::{repair_bio, LabelVocab, LabeledSequence, OUTSIDE};

use super::{featurize, CrfError, CrfModel, Encoded};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Minibatch Adam settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
    /// Features seen fewer times in training fall back to the unknown slot.
    pub min_feature_count: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 16,
            learning_rate: 0.01,
            epochs: 10,
            l2: 1e-4,
            seed: 0,
            min_feature_count: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CrfError> {
        if self.batch_size == 0 {
            return Err(CrfError::InvalidConfig("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CrfError::InvalidConfig("learning_rate must be positive".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(CrfError::InvalidConfig("l2 must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    /// Mean penalized log-likelihood over the epoch's batches.
    pub objective: f64,
    pub dev_f1: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: CrfModel,
    pub history: Vec<EpochReport>,
    /// Epoch the returned model comes from; 0 is the untrained model.
    pub best_epoch: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    /// One descent step on `-objective`, given the objective's ascent gradient.
    fn update(&mut self, params: &mut [f64], ascent: &[f64], lr: f64) {
        self.step += 1;
        let c1 = 1.0 - BETA1.powi(self.step);
        let c2 = 1.0 - BETA2.powi(self.step);
        for (((w, g), m), v) in params.iter_mut().zip(ascent).zip(&mut self.m).zip(&mut self.v) {
            let g = -g;
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *w -= lr * (*m / c1) / ((*v / c2).sqrt() + EPSILON);
        }
    }
}

fn feature_vocabulary(sequences: &[Vec<Vec<String>>], min_count: usize) -> Vec<String> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for seq in sequences {
        for f in seq.iter().flatten() {
            *counts.entry(f.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<String> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count.max(1))
        .map(|(f, _)| f.to_string())
        .collect();
    kept.sort_unstable();
    kept
}

fn encode_with(model: &CrfModel, feats: &[Vec<String>]) -> Vec<Vec<u32>> {
    feats
        .iter()
        .map(|fs| fs.iter().map(|f| model.feature_id(f)).collect())
        .collect()
}

fn dev_f1(model: &CrfModel, dev: &[Vec<Vec<u32>>], gold: &[&[String]]) -> f64 {
    let vocab = model.labels();
    let pred: Vec<Vec<String>> = dev
        .iter()
        .map(|x| {
            let mut tags: Vec<String> = model
                .viterbi(x)
                .into_iter()
                .map(|i| vocab.tag(i).unwrap_or(OUTSIDE).to_string())
                .collect();
            repair_bio(&mut tags);
            tags
        })
        .collect();
    score_tags(gold, &pred).map(|m| m.micro.f1).unwrap_or(0.0)
}

/// Trains by minibatch Adam on the negative mean log-likelihood and returns the model
/// with the best dev micro span-F1 (the last one when `dev` is empty).
pub fn train(
    train_set: &[LabeledSequence],
    dev_set: &[LabeledSequence],
    config: &TrainConfig,
) -> Result<Trained, CrfError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(CrfError::EmptyTrainingSet);
    }
    let vocab = LabelVocab::from_sequences(train_set);
    let train_feats: Vec<Vec<Vec<String>>> = train_set.iter().map(|s| featurize(&s.tokens)).collect();
    let mut model = CrfModel::zeros(vocab, feature_vocabulary(&train_feats, config.min_feature_count));
    log::info!(
        "training on {} sequences: {} tags, {} features, {} weights",
        train_set.len(),
        model.num_tags(),
        model.num_features(),
        model.params().len()
    );

    let examples: Vec<Encoded> = train_set
        .iter()
        .zip(&train_feats)
        .map(|(s, f)| {
            Ok(Encoded {
                features: encode_with(&model, f),
                labels: s
                    .labels
                    .iter()
                    .map(|t| model.labels().index(t).ok_or_else(|| CrfError::UnknownTag(t.clone())))
                    .collect::<Result<_, _>>()?,
            })
        })
        .collect::<Result<_, CrfError>>()?;
    drop(train_feats);
    let dev_x: Vec<Vec<Vec<u32>>> = dev_set.iter().map(|s| model.encode_features(&s.tokens)).collect();
    let dev_gold: Vec<&[String]> = dev_set.iter().map(|s| s.labels.as_slice()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(model.params().len());
    let mut grad = vec![0.0; model.params().len()];
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut best = model.clone();
    let mut best_f1 = if dev_set.is_empty() {
        None
    } else {
        Some(dev_f1(&model, &dev_x, &dev_gold))
    };
    let mut best_epoch = 0;
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut objective = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / chunk.len() as f64;
            let mut ll = 0.0;
            for &i in chunk {
                let ex = &examples[i];
                let (l, node, edge) = model.sequence_terms(ex);
                ll += l * scale;
                model.add_sequence_gradient(ex, &node, &edge, scale, &mut grad);
            }
            let mut sq = 0.0;
            for (g, w) in grad.iter_mut().zip(model.params()) {
                *g -= config.l2 * w;
                sq += w * w;
            }
            objective += ll - 0.5 * config.l2 * sq;
            batches += 1;
            adam.update(model.params_mut(), &grad, config.learning_rate);
        }
        let objective = objective / batches as f64;
        let f1 = (!dev_set.is_empty()).then(|| dev_f1(&model, &dev_x, &dev_gold));
        match f1 {
            Some(f1) => log::info!("epoch {epoch}: objective {objective:.5}, dev f1 {f1:.4}"),
            None => log::info!("epoch {epoch}: objective {objective:.5}"),
        }
        history.push(EpochReport {
            epoch,
            objective,
            dev_f1: f1,
        });
        let improved = match (f1, best_f1) {
            (Some(f), Some(b)) => f > b,
            _ => true,
        };
        if improved {
            best = model.clone();
            best_f1 = f1;
            best_epoch = epoch;
        }
    }
    Ok(Trained {
        model: best,
        history,
        best_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::Provenance;
    use rand::Rng;

    /// Sequences of `NAME NAME . WORD WORD WORD . YEAR .` with varied vocabulary.
    fn toy(n: usize, seed: u64) -> Vec<LabeledSequence> {
        let names = ["Doe", "Smith", "Lee", "Garcia", "Kim", "Ng", "Brown", "Otto"];
        let words = ["study", "of", "things", "deep", "models", "graph", "parsing", "fast", "robust"];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut tokens = Vec::new();
                let mut labels = Vec::new();
                let push = |tokens: &mut Vec<String>, labels: &mut Vec<String>, t: String, l: &str| {
                    tokens.push(t);
                    labels.push(l.to_string());
                };
                let k = rng.random_range(1..=3);
                for i in 0..k {
                    let tag = if i == 0 { "B-author" } else { "I-author" };
                    push(&mut tokens, &mut labels, names[rng.random_range(0..names.len())].into(), tag);
                }
                push(&mut tokens, &mut labels, ".".into(), "O");
                let k = rng.random_range(2..=5);
                for i in 0..k {
                    let tag = if i == 0 { "B-title" } else { "I-title" };
                    push(&mut tokens, &mut labels, words[rng.random_range(0..words.len())].into(), tag);
                }
                push(&mut tokens, &mut labels, ".".into(), "O");
                push(&mut tokens, &mut labels, rng.random_range(1950..2024).to_string(), "B-year");
                push(&mut tokens, &mut labels, ".".into(), "O");
                LabeledSequence::new(tokens, labels, Provenance::default()).unwrap()
            })
            .collect()
    }

    #[test]
    fn learns_toy_grammar() {
        let data = toy(200, 1);
        let (tr, dev) = data.split_at(160);
        let out = train(tr, dev, &TrainConfig::default()).unwrap();
        let best = out.history.iter().filter_map(|h| h.dev_f1).fold(0.0, f64::max);
        assert!(best >= 0.99, "best dev f1 {best}");
        assert!(out.best_epoch >= 1);
    }

    #[test]
    fn zero_epochs_returns_zero_model() {
        let data = toy(20, 2);
        let config = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let out = train(&data, &[], &config).unwrap();
        assert!(out.model.params().iter().all(|&w| w == 0.0));
        assert_eq!(out.best_epoch, 0);
    }

    #[test]
    fn deterministic() {
        let data = toy(60, 3);
        let config = TrainConfig {
            epochs: 2,
            seed: 5,
            ..TrainConfig::default()
        };
        let a = train(&data[..40], &data[40..], &config).unwrap();
        let b = train(&data[..40], &data[40..], &config).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.model.to_json(), b.model.to_json());
    }

    #[test]
    fn rejects_empty_and_bad_config() {
        assert!(matches!(train(&[], &[], &TrainConfig::default()), Err(CrfError::EmptyTrainingSet)));
        let data = toy(2, 4);
        let bad = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&data, &[], &bad), Err(CrfError::InvalidConfig(_))));
    }

    #[test]
    fn rare_features_pruned() {
        let data = toy(30, 6);
        let config = TrainConfig {
            epochs: 0,
            min_feature_count: 1000,
            ..TrainConfig::default()
        };
        let out = train(&data, &[], &config).unwrap();
        assert_eq!(out.model.num_features(), 1);
    }
}
