//! End-to-end experiments: split, prompt, predict, map, score, aggregate.
//!
//! Replication `i` uses seed `split.seed + i` for its split, so one config
//! describes a whole set of replications. Artifacts land under the output
//! directory as
//!
//! ```text
//! <out>/rep-<i>/split.json
//! <out>/rep-<i>/prompts.jsonl
//! <out>/rep-<i>/raw.jsonl
//! <out>/rep-<i>/preds.jsonl
//! <out>/rep-<i>/metrics.json
//! <out>/report.json
//! ```
//!
//! Nothing in these files depends on wall-clock time, so rerunning a
//! deterministic provider rewrites them byte for byte.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{self, Corpus, CorpusError, MarkerConfig, StatsReport};
use crate::metrics::{self, AggregateReport, MetricsError, MetricsReport};
use crate::prompting::{DemoSelection, DemonstrationPolicy, PromptError, TemplateRegistry};
use crate::providers::baseline::{BaselineConfig, BaselinePredictor};
use crate::providers::file::{self, FilePredictor};
use crate::providers::llm::{self, LlmConfig};
use crate::providers::subprocess::{SubprocessConfig, SubprocessPredictor};
use crate::providers::{render_prompts, DemoPlan, Prediction, PredictionRequest, Predictor, ProviderError};
use crate::response_mapper::{LabelValue, PhraseListError, PhraseLists};
use crate::splitter::{self, write_atomic, Setting, SplitConfig, SplitError, SplitResult};
use crate::tables::{ResultCell, StatsRow};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    PhraseList(#[from] PhraseListError),
    #[error("replication {replication}: {source}")]
    Split { replication: usize, source: SplitError },
    #[error("replication {replication}: {source}")]
    Provider { replication: usize, source: ProviderError },
    #[error("replication {replication}: {source}")]
    Metrics { replication: usize, source: MetricsError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 2 for provider failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Provider { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = RunError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProviderSpec {
    Baseline(BaselineConfig),
    /// Prediction files; `{rep}` in the path is replaced by the replication index.
    File {
        path: String,
    },
    Subprocess(SubprocessConfig),
    Llm(LlmConfig),
}

impl ProviderSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProviderSpec::Baseline(_) => "baseline",
            ProviderSpec::File { .. } => "file",
            ProviderSpec::Subprocess(_) => "subprocess",
            ProviderSpec::Llm(_) => "llm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    #[serde(default)]
    pub markers: MarkerConfig,
    /// `split.seed` is the root seed for replications.
    pub split: SplitConfig,
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub provider: ProviderSpec,
    #[serde(default = "default_template")]
    pub template: String,
    #[serde(default)]
    pub template_file: Option<PathBuf>,
    /// Few-shot demonstration policy. When absent, k-shot runs use up to `k`
    /// same-PET demonstrations (random train rows as fallback) and every
    /// other setting is zero-shot.
    #[serde(default)]
    pub demonstrations: Option<DemonstrationPolicy>,
    #[serde(default)]
    pub phrase_lists: Option<PathBuf>,
    pub output_dir: PathBuf,
}

fn default_replications() -> usize {
    1
}

fn default_template() -> String {
    "default".into()
}

impl ExperimentConfig {
    /// Reads TOML, or JSON when the path ends in `.json`. Relative paths in
    /// the file are kept as written (resolved against the working directory).
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let config: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| RunError::Config(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| RunError::Config(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(RunError::Config("replications must be >= 1".into()));
        }
        self.split.validate().map_err(|e| RunError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }

    pub fn replication_seed(&self, replication: usize) -> u64 {
        self.split.seed.wrapping_add(replication as u64)
    }

    fn demo_plan(&self) -> DemoPlan {
        match self.demonstrations {
            Some(policy) => DemoPlan::Policy(policy),
            None if self.split.setting == Setting::KShot => DemoPlan::SamePetOrRandom {
                count: self.split.k,
                seed: self.split.seed,
            },
            None => DemoPlan::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub replication: usize,
    pub seed: u64,
    pub test_size: usize,
    pub unique_test_pets: usize,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsEcho {
    pub avg_test_size: f64,
    pub avg_unique_test_pets: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub setting: String,
    pub provider: String,
    pub config_hash: String,
    pub corpus_sha256: String,
    pub replications: Vec<ReplicationResult>,
    pub aggregate: AggregateReport,
    pub stats: StatsEcho,
    /// Artifact paths relative to the output directory.
    pub manifest: Vec<String>,
    pub config: ExperimentConfig,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn result_cell(&self) -> ResultCell {
        ResultCell {
            setting: self.setting.clone(),
            provider: self.provider.clone(),
            aggregate: self.aggregate,
        }
    }
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, &item).expect("artifact serializes");
        out.push(b'\n');
    }
    out
}

#[derive(Serialize)]
struct PromptLine<'a> {
    record_id: usize,
    prompt: &'a str,
}

#[derive(Serialize)]
struct RawLine<'a> {
    record_id: usize,
    raw: &'a str,
}

#[derive(Serialize, Deserialize)]
struct PredLine {
    record_id: usize,
    label: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raw: Option<String>,
    #[serde(flatten)]
    mapped: crate::response_mapper::MappedLabel,
}

fn unique_pets(corpus: &Corpus, ids: &[usize]) -> usize {
    ids.iter()
        .map(|&id| corpus.records()[id].pet_term.as_str())
        .collect::<BTreeSet<_>>()
        .len()
}

pub fn gold_labels(corpus: &Corpus, ids: &[usize]) -> Vec<u8> {
    ids.iter().map(|&id| corpus.records()[id].label).collect()
}

/// Scores aligned predictions against the corpus labels of their record ids.
pub fn score_predictions(corpus: &Corpus, predictions: &[Prediction]) -> Result<MetricsReport, MetricsError> {
    let ids: Vec<usize> = predictions.iter().map(|p| p.record_id).collect();
    let pred: Vec<LabelValue> = predictions.iter().map(|p| p.label.value).collect();
    metrics::score(&gold_labels(corpus, &ids), &pred)
}

/// Scores a prediction file against the test part of a split.
pub fn score_file(corpus: &Corpus, split: &SplitResult, preds: &Path, lists: &PhraseLists) -> Result<MetricsReport> {
    let predictions = file::predict_from_file(preds, &split.test, lists)
        .map_err(|source| RunError::Provider { replication: 0, source })?;
    score_predictions(corpus, &predictions).map_err(|source| RunError::Metrics { replication: 0, source })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let corpus = corpus::load_corpus_path(&config.corpus, &config.markers)?;
    run_experiment_on(config, &corpus)
}

/// As [`run_experiment`], with the corpus already loaded.
pub fn run_experiment_on(config: &ExperimentConfig, corpus: &Corpus) -> Result<ExperimentReport> {
    config.validate()?;
    let mut registry = TemplateRegistry::default();
    if let Some(path) = &config.template_file {
        registry.load_file(path)?;
    }
    let template = registry.get(&config.template)?.clone();
    let lists = match &config.phrase_lists {
        Some(path) => PhraseLists::load(path)?,
        None => PhraseLists::default(),
    };
    let plan = config.demo_plan();
    let out = &config.output_dir;
    fs::create_dir_all(out)?;

    let mut manifest = Vec::new();
    let mut replications = Vec::new();
    for i in 0..config.replications {
        let seed = config.replication_seed(i);
        let split_config = SplitConfig {
            seed,
            ..config.split.clone()
        };
        let split =
            splitter::split(corpus, &split_config).map_err(|source| RunError::Split { replication: i, source })?;
        let rep_name = format!("rep-{i}");
        let rep_dir = out.join(&rep_name);
        fs::create_dir_all(&rep_dir)?;
        let mut persist = |name: &str, bytes: &[u8]| -> Result<()> {
            write_atomic(&rep_dir.join(name), bytes)?;
            manifest.push(format!("{rep_name}/{name}"));
            Ok(())
        };
        persist("split.json", split.to_json().as_bytes())?;

        let request = PredictionRequest::from_split(corpus, &split);
        let provider_err = |source| RunError::Provider { replication: i, source };
        let prompts = render_prompts(&request, &template, &plan).map_err(provider_err)?;
        persist(
            "prompts.jsonl",
            &jsonl(prompts.iter().map(|(id, p)| PromptLine {
                record_id: *id,
                prompt: p,
            })),
        )?;

        let (predictions, llm_stats) = match &config.provider {
            ProviderSpec::Baseline(cfg) => BaselinePredictor { config: cfg.clone() }
                .predict(&request)
                .map(|p| (p, None)),
            ProviderSpec::File { path } => FilePredictor {
                path: PathBuf::from(path.replace("{rep}", &i.to_string())),
                lists: lists.clone(),
            }
            .predict(&request)
            .map(|p| (p, None)),
            ProviderSpec::Subprocess(cfg) => SubprocessPredictor {
                config: cfg.clone(),
                lists: lists.clone(),
            }
            .predict(&request)
            .map(|p| (p, None)),
            ProviderSpec::Llm(cfg) => llm::predict_via_llm(cfg, &prompts, &lists).map(|outcome| {
                log::info!(
                    "replication {i}: {} requests, {} retries, {} cache hits",
                    outcome.stats.requests_sent,
                    outcome.stats.retries,
                    outcome.stats.cache_hits
                );
                (outcome.predictions, Some(outcome.stats))
            }),
        }
        .map_err(provider_err)?;
        // Request counts differ between cold and warm caches, so they stay out of the manifest.
        if let Some(stats) = llm_stats {
            write_atomic(
                &rep_dir.join("llm_stats.json"),
                serde_json::to_string_pretty(&stats)
                    .expect("stats serialize")
                    .as_bytes(),
            )?;
        }

        persist(
            "raw.jsonl",
            &jsonl(predictions.iter().filter_map(|p| {
                p.raw.as_deref().map(|raw| RawLine {
                    record_id: p.record_id,
                    raw,
                })
            })),
        )?;
        persist(
            "preds.jsonl",
            &jsonl(predictions.iter().map(|p| PredLine {
                record_id: p.record_id,
                label: p.label.value.as_binary(),
                raw: p.raw.clone(),
                mapped: p.label.clone(),
            })),
        )?;

        let metrics =
            score_predictions(corpus, &predictions).map_err(|source| RunError::Metrics { replication: i, source })?;
        let result = ReplicationResult {
            replication: i,
            seed,
            test_size: split.test.len(),
            unique_test_pets: unique_pets(corpus, &split.test),
            metrics,
        };
        persist(
            "metrics.json",
            serde_json::to_string_pretty(&result)
                .expect("metrics serialize")
                .as_bytes(),
        )?;
        replications.push(result);
    }

    let reports: Vec<MetricsReport> = replications.iter().map(|r| r.metrics).collect();
    let aggregate =
        metrics::aggregate_replications(&reports).map_err(|source| RunError::Metrics { replication: 0, source })?;
    let n = replications.len() as f64;
    let stats = StatsEcho {
        avg_test_size: replications.iter().map(|r| r.test_size as f64).sum::<f64>() / n,
        avg_unique_test_pets: replications.iter().map(|r| r.unique_test_pets as f64).sum::<f64>() / n,
    };
    let report = ExperimentReport {
        setting: config.split.label(),
        provider: config.provider.name().to_string(),
        config_hash: config.hash(),
        corpus_sha256: corpus.source_meta.sha256.clone(),
        replications,
        aggregate,
        stats,
        manifest,
        config: config.clone(),
    };
    write_atomic(&out.join("report.json"), report.to_json().as_bytes())?;
    Ok(report)
}

/// Default demonstration policy for exact same-PET demonstrations.
pub fn same_pet_policy(count: usize, seed: u64) -> DemonstrationPolicy {
    DemonstrationPolicy {
        policy: DemoSelection::SamePet,
        count,
        seed,
    }
}

/// The regimes of the dataset statistics table: standard, k = 1, k = 3,
/// zero-shot random, then one zero-shot type split per category.
pub fn statistics_settings(corpus: &Corpus) -> Vec<SplitConfig> {
    let mut settings = vec![
        SplitConfig::standard(0),
        SplitConfig::kshot(1, 0),
        SplitConfig::kshot(3, 0),
        SplitConfig::zeroshot_random(0),
    ];
    settings.extend(
        corpus
            .categories()
            .iter()
            .map(|c| SplitConfig::zeroshot_type(c.clone(), 0)),
    );
    settings
}

/// Builds `samples` splits per setting with seeds `root_seed..root_seed+samples`
/// and averages their test statistics.
pub fn collect_stats(
    corpus: &Corpus,
    settings: &[SplitConfig],
    samples: usize,
    root_seed: u64,
) -> Result<Vec<(SplitConfig, StatsReport)>, SplitError> {
    settings
        .iter()
        .map(|base| {
            let splits = (0..samples)
                .map(|i| {
                    splitter::split(
                        corpus,
                        &SplitConfig {
                            seed: root_seed.wrapping_add(i as u64),
                            ..base.clone()
                        },
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            let report = corpus::corpus_stats(corpus, &splits).map_err(|e| SplitError::InvalidConfig(e.to_string()))?;
            Ok((base.clone(), report))
        })
        .collect()
}

pub fn stats_rows(stats: &[(SplitConfig, StatsReport)]) -> Vec<StatsRow> {
    stats
        .iter()
        .map(|(cfg, s)| StatsRow {
            label: cfg.label(),
            avg_test_size: s.avg_test_size,
            avg_unique_test_pets: s.avg_unique_test_pets,
        })
        .collect()
}
