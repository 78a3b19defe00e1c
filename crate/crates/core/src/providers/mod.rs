//! Prediction providers.
//!
//! Every provider answers a [`PredictionRequest`] with exactly one
//! [`Prediction`] per eval record, or fails. Eval rows carry no labels, so a
//! provider cannot see the answers it is scored against.
//!
//! * [`file`]: read predictions (labels or raw responses) from JSON lines.
//! * [`subprocess`]: stream the request to a child process over stdin/stdout.
//! * [`llm`]: query an HTTP completions endpoint with rendered prompts.
//! * [`baseline`]: a hashed bag-of-words logistic regression trained in process.

pub mod baseline;
pub mod file;
pub mod llm;
pub mod subprocess;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, MarkerConfig, PetRecord, PetStatus};
use crate::prompting::{self, DemonstrationPolicy, PromptError, PromptTemplate};
use crate::response_mapper::MappedLabel;
use crate::splitter::SplitResult;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("missing predictions for record ids {0:?}")]
    MissingPrediction(Vec<usize>),
    #[error("duplicate prediction for record id {0}")]
    DuplicatePrediction(usize),
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("could not start `{command}`: {source}")]
    SpawnError { command: String, source: std::io::Error },
    #[error("protocol error at line {line}: {message}")]
    ProtocolError { line: usize, message: String },
    #[error("provider timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("provider returned no prediction for record ids {0:?}")]
    IncompleteCoverage(Vec<usize>),
    #[error("authentication failed: {0}")]
    AuthError(String),
    #[error("endpoint error: {0}")]
    EndpointError(String),
    #[error("invalid provider config: {0}")]
    ConfigError(String),
    #[error("training data has a single class ({0} rows)")]
    DegenerateTraining(usize),
    #[error("request train and eval sets share record ids {0:?}")]
    LeakyRequest(Vec<usize>),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = ProviderError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainRow {
    pub record_id: usize,
    pub sentence: String,
    pub pet_term: String,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRow {
    pub record_id: usize,
    pub sentence: String,
    pub pet_term: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRequest {
    pub train: Vec<TrainRow>,
    pub eval: Vec<EvalRow>,
    /// Split label, e.g. `kshot(k=3)`.
    pub setting: String,
    #[serde(skip, default)]
    pub markers: MarkerConfig,
}

impl PredictionRequest {
    /// Train rows from the split's train part, eval rows from its test part.
    pub fn from_split(corpus: &Corpus, split: &SplitResult) -> Self {
        let train = split
            .train
            .iter()
            .map(|&id| {
                let r = &corpus.records()[id];
                TrainRow {
                    record_id: id,
                    sentence: r.sentence.clone(),
                    pet_term: r.pet_term.clone(),
                    label: r.label,
                }
            })
            .collect();
        let eval = split
            .test
            .iter()
            .map(|&id| {
                let r = &corpus.records()[id];
                EvalRow {
                    record_id: id,
                    sentence: r.sentence.clone(),
                    pet_term: r.pet_term.clone(),
                }
            })
            .collect();
        let markers = corpus.records().first().map(|r| r.markers).unwrap_or_default();
        PredictionRequest {
            train,
            eval,
            setting: split.config.label(),
            markers,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let train: BTreeSet<usize> = self.train.iter().map(|r| r.record_id).collect();
        let shared: Vec<usize> = self
            .eval
            .iter()
            .map(|r| r.record_id)
            .filter(|id| train.contains(id))
            .collect();
        if shared.is_empty() {
            Ok(())
        } else {
            Err(ProviderError::LeakyRequest(shared))
        }
    }

    pub fn eval_ids(&self) -> Vec<usize> {
        self.eval.iter().map(|r| r.record_id).collect()
    }

    fn record(&self, record_id: usize, sentence: &str, pet_term: &str, label: u8) -> PetRecord {
        PetRecord {
            record_id,
            sentence: sentence.to_string(),
            pet_term: pet_term.to_string(),
            label,
            category: String::new(),
            status: PetStatus::Unknown,
            markers: self.markers,
        }
    }

    pub fn train_records(&self) -> Vec<PetRecord> {
        self.train
            .iter()
            .map(|r| self.record(r.record_id, &r.sentence, &r.pet_term, r.label))
            .collect()
    }

    /// Eval rows as records; their label field is a placeholder 0.
    pub fn eval_records(&self) -> Vec<PetRecord> {
        self.eval
            .iter()
            .map(|r| self.record(r.record_id, &r.sentence, &r.pet_term, 0))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub record_id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    pub label: MappedLabel,
}

pub trait Predictor {
    fn name(&self) -> &str;

    fn predict(&self, request: &PredictionRequest) -> Result<Vec<Prediction>>;
}

/// Orders predictions by `eval_ids`, rejecting duplicates and gaps.
/// Predictions for ids outside `eval_ids` are dropped.
pub fn align_predictions(
    eval_ids: &[usize],
    predictions: Vec<Prediction>,
    missing: fn(Vec<usize>) -> ProviderError,
) -> Result<Vec<Prediction>> {
    let wanted: BTreeSet<usize> = eval_ids.iter().copied().collect();
    let mut by_id: BTreeMap<usize, Prediction> = BTreeMap::new();
    for p in predictions {
        if !wanted.contains(&p.record_id) {
            continue;
        }
        let id = p.record_id;
        if by_id.insert(id, p).is_some() {
            return Err(ProviderError::DuplicatePrediction(id));
        }
    }
    let absent: Vec<usize> = eval_ids.iter().copied().filter(|id| !by_id.contains_key(id)).collect();
    if !absent.is_empty() {
        return Err(missing(absent));
    }
    Ok(eval_ids.iter().map(|id| by_id.remove(id).unwrap()).collect())
}

/// How few-shot demonstrations are chosen for each rendered prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DemoPlan {
    /// Zero-shot prompts.
    None,
    /// Up to `count` train rows sharing the query's PET, or `count` random
    /// train rows when the PET has none in train.
    SamePetOrRandom { count: usize, seed: u64 },
    /// Exactly the given policy; fails when it cannot be satisfied.
    Policy(DemonstrationPolicy),
}

/// Renders one prompt per eval row, in eval order.
pub fn render_prompts(
    request: &PredictionRequest,
    template: &PromptTemplate,
    plan: &DemoPlan,
) -> Result<Vec<(usize, String)>> {
    let train = request.train_records();
    let train_refs: Vec<&PetRecord> = train.iter().collect();
    request
        .eval_records()
        .iter()
        .map(|query| {
            let demos = match plan {
                DemoPlan::None => Vec::new(),
                DemoPlan::SamePetOrRandom { count, seed } => {
                    prompting::select_with_fallback(query, &train_refs, *count, *seed)?
                }
                DemoPlan::Policy(policy) => prompting::select_demonstrations(query, &train_refs, policy)?,
            };
            Ok((query.record_id, prompting::render_few_shot(query, &demos, template)?))
        })
        .collect()
}
