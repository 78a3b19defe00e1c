//! Hashed bag-of-words logistic regression.
//!
//! Features are binary indicators of lowercased word n-grams from the
//! marker-free sentence plus the PET's own tokens (in a separate namespace),
//! hashed with FNV-1a into `2^hash_bits` buckets. Weights are fit by
//! per-example gradient descent over a seeded visiting order, so a fixed seed
//! reproduces the same model exactly.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::subprocess::{ChildModel, ChildReply};
use super::{EvalRow, Prediction, PredictionRequest, Predictor, ProviderError, Result, TrainRow};
use crate::corpus::MarkerConfig;
use crate::response_mapper::MappedLabel;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Word n-gram orders to extract, e.g. `[1, 2]`.
    #[serde(default = "default_ngrams")]
    pub ngram_orders: Vec<usize>,
    #[serde(default = "default_hash_bits")]
    pub hash_bits: u32,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_ngrams() -> Vec<usize> {
    vec![1, 2]
}
fn default_hash_bits() -> u32 {
    18
}
fn default_epochs() -> usize {
    10
}
fn default_learning_rate() -> f64 {
    0.5
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            ngram_orders: default_ngrams(),
            hash_bits: default_hash_bits(),
            epochs: default_epochs(),
            learning_rate: default_learning_rate(),
            seed: 0,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    config: BaselineConfig,
    weights: Vec<f64>,
    bias: f64,
    markers: MarkerConfig,
}

impl BaselineModel {
    fn features(&self, sentence: &str, pet_term: &str) -> Vec<usize> {
        featurize(&self.config, &self.markers, sentence, pet_term)
    }

    /// Probability of the euphemistic class.
    pub fn score(&self, sentence: &str, pet_term: &str) -> f64 {
        let z: f64 = self.bias
            + self
                .features(sentence, pet_term)
                .iter()
                .map(|&j| self.weights[j])
                .sum::<f64>();
        sigmoid(z)
    }

    /// 1 when the score is at least 0.5.
    pub fn predict_label(&self, sentence: &str, pet_term: &str) -> u8 {
        u8::from(self.score(sentence, pet_term) >= 0.5)
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn featurize(config: &BaselineConfig, markers: &MarkerConfig, sentence: &str, pet_term: &str) -> Vec<usize> {
    let dim = 1usize << config.hash_bits;
    let words = tokens(&markers.strip(sentence));
    let mut set = BTreeSet::new();
    for &n in &config.ngram_orders {
        if n == 0 {
            continue;
        }
        for gram in words.windows(n) {
            let key = format!("w{n}:{}", gram.join(" "));
            set.insert((fnv1a(key.as_bytes()) as usize) & (dim - 1));
        }
    }
    for t in tokens(pet_term) {
        let key = format!("pet:{t}");
        set.insert((fnv1a(key.as_bytes()) as usize) & (dim - 1));
    }
    set.into_iter().collect()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn baseline_train(rows: &[TrainRow], config: &BaselineConfig, markers: &MarkerConfig) -> Result<BaselineModel> {
    if !(1..=26).contains(&config.hash_bits) {
        return Err(ProviderError::ConfigError(format!(
            "hash_bits {} must lie in 1..=26",
            config.hash_bits
        )));
    }
    let ones = rows.iter().filter(|r| r.label == 1).count();
    if ones == 0 || ones == rows.len() {
        return Err(ProviderError::DegenerateTraining(rows.len()));
    }
    let mut model = BaselineModel {
        config: config.clone(),
        weights: vec![0.0; 1usize << config.hash_bits],
        bias: 0.0,
        markers: *markers,
    };
    let examples: Vec<(Vec<usize>, f64)> = rows
        .iter()
        .map(|r| (model.features(&r.sentence, &r.pet_term), f64::from(r.label)))
        .collect();

    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rng = rng::seeded(config.seed);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, y) = &examples[i];
            let z = model.bias + x.iter().map(|&j| model.weights[j]).sum::<f64>();
            let step = config.learning_rate * (sigmoid(z) - y);
            for &j in x {
                model.weights[j] -= step;
            }
            model.bias -= step;
        }
    }
    Ok(model)
}

pub fn baseline_predict(model: &BaselineModel, rows: &[EvalRow]) -> Vec<Prediction> {
    rows.iter()
        .map(|r| Prediction {
            record_id: r.record_id,
            raw: None,
            label: MappedLabel::direct(model.predict_label(&r.sentence, &r.pet_term)),
        })
        .collect()
}

pub struct BaselinePredictor {
    pub config: BaselineConfig,
}

impl Predictor for BaselinePredictor {
    fn name(&self) -> &str {
        "baseline"
    }

    fn predict(&self, request: &PredictionRequest) -> Result<Vec<Prediction>> {
        let model = baseline_train(&request.train, &self.config, &request.markers)?;
        Ok(baseline_predict(&model, &request.eval))
    }
}

/// The baseline as a protocol child; an untrained model answers 1.
pub struct BaselineChild {
    pub config: BaselineConfig,
    pub markers: MarkerConfig,
    model: Option<BaselineModel>,
}

impl BaselineChild {
    pub fn new(config: BaselineConfig) -> Self {
        BaselineChild {
            config,
            markers: MarkerConfig::default(),
            model: None,
        }
    }
}

impl ChildModel for BaselineChild {
    fn train(&mut self, rows: &[TrainRow]) -> Result<()> {
        self.model = Some(baseline_train(rows, &self.config, &self.markers)?);
        Ok(())
    }

    fn predict(&self, row: &EvalRow) -> ChildReply {
        let label = self
            .model
            .as_ref()
            .map_or(1, |m| m.predict_label(&row.sentence, &row.pet_term));
        ChildReply {
            record_id: row.record_id,
            label: Some(label),
            raw: None,
        }
    }
}
