//! Train/validation/test split construction for the four evaluation regimes.
//!
//! * **Standard**: a uniform sentence-level 70/15/15 partition.
//! * **K-shot**: whole PETs are drawn at random; each drawn PET keeps `k` of its
//!   sentences in train and moves the rest into a held-out pool. Drawing stops
//!   once the pool reaches the target window around `pool_fraction` of the
//!   corpus. The pool is then halved at the sentence level into validation and
//!   test.
//! * **Zero-shot random**: as k-shot with `k = 0`, so held-out PETs never
//!   appear in train.
//! * **Zero-shot type**: one category is held out entirely and halved into
//!   validation and test; train is drawn from the remaining categories and
//!   subsampled to the equalized size `T* = min_c (|corpus| - |c|)`, so every
//!   choice of held-out category trains on the same number of rows.
//!
//! All randomness comes from `config.seed`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{build_pet_index, Corpus};
use crate::rng;

/// Smallest corpus any regime will split.
pub const MIN_CORPUS_RECORDS: usize = 10;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("invalid split config: {0}")]
    InvalidConfig(String),
    #[error("corpus has {found} records; at least {needed} are required")]
    CorpusTooSmall { needed: usize, found: usize },
    #[error("pool window cannot be reached: lower bound {lower:.2} rows, at most {reachable} rows can be held out")]
    InfeasibleWindow { lower: f64, reachable: usize },
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("category `{category}` has {rows} rows; at least 2 are required")]
    DegenerateCategory { category: String, rows: usize },
    #[error("split file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SplitError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "standard")]
    Standard,
    #[serde(rename = "kshot")]
    KShot,
    #[serde(rename = "zeroshot-random")]
    ZeroShotRandom,
    #[serde(rename = "zeroshot-type")]
    ZeroShotType,
}

impl Setting {
    pub fn as_str(&self) -> &'static str {
        match self {
            Setting::Standard => "standard",
            Setting::KShot => "kshot",
            Setting::ZeroShotRandom => "zeroshot-random",
            Setting::ZeroShotType => "zeroshot-type",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Setting {
    type Err = SplitError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Setting::Standard),
            "kshot" | "k-shot" => Ok(Setting::KShot),
            "zeroshot-random" => Ok(Setting::ZeroShotRandom),
            "zeroshot-type" => Ok(Setting::ZeroShotType),
            other => Err(SplitError::InvalidConfig(format!("unknown setting `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub setting: Setting,
    /// Number of train sentences kept per held-out PET (k-shot only).
    #[serde(default)]
    pub k: usize,
    #[serde(default)]
    pub holdout_category: Option<String>,
    /// Fraction of the corpus placed in validation+test combined.
    #[serde(default = "default_pool_fraction")]
    pub pool_fraction: f64,
    /// Half-width of the accepted pool band, as a fraction of the corpus.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_pool_fraction() -> f64 {
    0.30
}

fn default_tolerance() -> f64 {
    0.02
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            setting: Setting::Standard,
            k: 0,
            holdout_category: None,
            pool_fraction: default_pool_fraction(),
            tolerance: default_tolerance(),
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn standard(seed: u64) -> Self {
        SplitConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn kshot(k: usize, seed: u64) -> Self {
        SplitConfig {
            setting: Setting::KShot,
            k,
            seed,
            ..Default::default()
        }
    }

    pub fn zeroshot_random(seed: u64) -> Self {
        SplitConfig {
            setting: Setting::ZeroShotRandom,
            seed,
            ..Default::default()
        }
    }

    pub fn zeroshot_type(category: impl Into<String>, seed: u64) -> Self {
        SplitConfig {
            setting: Setting::ZeroShotType,
            holdout_category: Some(category.into()),
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pool_fraction > 0.0 && self.pool_fraction < 1.0) {
            return Err(SplitError::InvalidConfig(format!(
                "pool_fraction {} must lie in (0, 1)",
                self.pool_fraction
            )));
        }
        if !(self.tolerance >= 0.0 && self.tolerance < self.pool_fraction) {
            return Err(SplitError::InvalidConfig(format!(
                "tolerance {} must lie in [0, pool_fraction)",
                self.tolerance
            )));
        }
        match self.setting {
            Setting::KShot if self.k < 1 => Err(SplitError::InvalidConfig("k-shot requires k >= 1".into())),
            Setting::ZeroShotType if self.holdout_category.is_none() => Err(SplitError::InvalidConfig(
                "zero-shot type split requires a holdout category".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Accepted range for the combined validation+test size, in rows.
    pub fn pool_bounds(&self, corpus_len: usize) -> (f64, f64) {
        let n = corpus_len as f64;
        let target = self.pool_fraction * n;
        let window = self.tolerance * n;
        (target - window, target + window)
    }

    /// Short label used in tables, e.g. `kshot(k=3)` or `zeroshot-type(death)`.
    pub fn label(&self) -> String {
        match self.setting {
            Setting::KShot => format!("kshot(k={})", self.k),
            Setting::ZeroShotType => format!("zeroshot-type({})", self.holdout_category.as_deref().unwrap_or("?")),
            s => s.as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

/// Three disjoint, ascending lists of record ids plus the config that made them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub config: SplitConfig,
    pub realized_sizes: RealizedSizes,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitResult {
    pub fn from_parts(
        config: SplitConfig,
        mut train: Vec<usize>,
        mut validation: Vec<usize>,
        mut test: Vec<usize>,
    ) -> Self {
        train.sort_unstable();
        validation.sort_unstable();
        test.sort_unstable();
        SplitResult {
            config,
            realized_sizes: RealizedSizes {
                train: train.len(),
                validation: validation.len(),
                test: test.len(),
            },
            train,
            validation,
            test,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("split serializes")
    }

    /// Writes the split file via a temporary sibling and rename.
    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Builds a split for whichever regime `config.setting` names.
pub fn split(corpus: &Corpus, config: &SplitConfig) -> Result<SplitResult> {
    match config.setting {
        Setting::Standard => split_standard(corpus, config),
        Setting::KShot => split_kshot(corpus, config),
        Setting::ZeroShotRandom => split_zeroshot_random(corpus, config),
        Setting::ZeroShotType => split_zeroshot_type(corpus, config),
    }
}

fn require_setting(config: &SplitConfig, want: Setting) -> Result<()> {
    config.validate()?;
    if config.setting != want {
        return Err(SplitError::InvalidConfig(format!(
            "expected setting {want}, got {}",
            config.setting
        )));
    }
    Ok(())
}

fn require_size(corpus: &Corpus) -> Result<()> {
    if corpus.len() < MIN_CORPUS_RECORDS {
        return Err(SplitError::CorpusTooSmall {
            needed: MIN_CORPUS_RECORDS,
            found: corpus.len(),
        });
    }
    Ok(())
}

pub fn split_standard(corpus: &Corpus, config: &SplitConfig) -> Result<SplitResult> {
    require_setting(config, Setting::Standard)?;
    require_size(corpus)?;
    let n = corpus.len();
    let part = ((config.pool_fraction / 2.0) * n as f64).round() as usize;
    let mut rng = rng::seeded(config.seed);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut rng);
    let test = ids[..part].to_vec();
    let validation = ids[part..2 * part].to_vec();
    let train = ids[2 * part..].to_vec();
    Ok(SplitResult::from_parts(config.clone(), train, validation, test))
}

pub fn split_kshot(corpus: &Corpus, config: &SplitConfig) -> Result<SplitResult> {
    require_setting(config, Setting::KShot)?;
    split_pooled(corpus, config, config.k)
}

pub fn split_zeroshot_random(corpus: &Corpus, config: &SplitConfig) -> Result<SplitResult> {
    require_setting(config, Setting::ZeroShotRandom)?;
    split_pooled(corpus, config, 0)
}

/// Shared PET-sampling loop for k-shot (`keep = k`) and zero-shot random (`keep = 0`).
fn split_pooled(corpus: &Corpus, config: &SplitConfig, keep: usize) -> Result<SplitResult> {
    require_size(corpus)?;
    let index = build_pet_index(corpus);
    let (lower, upper) = config.pool_bounds(corpus.len());

    // PETs with M <= keep would leave nothing to hold out.
    let mut candidates: Vec<&Vec<usize>> = index.entries.values().filter(|ids| ids.len() > keep).collect();
    let reachable: usize = candidates.iter().map(|ids| ids.len() - keep).sum();
    if (reachable as f64) < lower {
        return Err(SplitError::InfeasibleWindow { lower, reachable });
    }

    let mut rng = rng::seeded(config.seed);
    candidates.shuffle(&mut rng);

    let mut pool: Vec<usize> = Vec::new();
    let mut overshooting: Vec<&Vec<usize>> = Vec::new();
    let hold_out = |ids: &Vec<usize>, pool: &mut Vec<usize>, rng: &mut rng::Rng| {
        let mut ids = ids.clone();
        ids.shuffle(rng);
        pool.extend_from_slice(&ids[keep..]);
    };

    for ids in candidates {
        if pool.len() as f64 >= lower {
            break;
        }
        let contribution = ids.len() - keep;
        if (pool.len() + contribution) as f64 > upper {
            overshooting.push(ids);
            continue;
        }
        hold_out(ids, &mut pool, &mut rng);
    }
    if (pool.len() as f64) < lower {
        // Nothing left fits inside the window: take the smallest overshoot.
        let smallest = overshooting
            .iter()
            .min_by_key(|ids| ids.len())
            .expect("reachable mass guarantees a remaining candidate");
        hold_out(smallest, &mut pool, &mut rng);
    }

    let in_pool: BTreeSet<usize> = pool.iter().copied().collect();
    let train: Vec<usize> = (0..corpus.len()).filter(|id| !in_pool.contains(id)).collect();
    let mut pool: Vec<usize> = in_pool.into_iter().collect();
    pool.shuffle(&mut rng);
    let half = pool.len() / 2;
    let validation = pool[..half].to_vec();
    let test = pool[half..].to_vec();
    Ok(SplitResult::from_parts(config.clone(), train, validation, test))
}

/// `T* = min over categories c of (|corpus| - |c|)`.
pub fn equalized_train_size(corpus: &Corpus) -> usize {
    corpus
        .category_sizes()
        .values()
        .map(|&size| corpus.len() - size)
        .min()
        .unwrap_or(0)
}

pub fn split_zeroshot_type(corpus: &Corpus, config: &SplitConfig) -> Result<SplitResult> {
    require_setting(config, Setting::ZeroShotType)?;
    let category = config.holdout_category.as_deref().unwrap_or_default();
    if !corpus.categories().iter().any(|c| c == category) {
        return Err(SplitError::UnknownCategory(category.to_string()));
    }
    let (mut held, mut rest): (Vec<usize>, Vec<usize>) = corpus
        .records()
        .iter()
        .map(|r| r.record_id)
        .partition(|&id| corpus.records()[id].category == category);
    if held.len() < 2 {
        return Err(SplitError::DegenerateCategory {
            category: category.to_string(),
            rows: held.len(),
        });
    }

    let mut rng = rng::seeded(config.seed);
    held.shuffle(&mut rng);
    let half = held.len() / 2;
    let validation = held[..half].to_vec();
    let test = held[half..].to_vec();

    let target = equalized_train_size(corpus);
    let (chosen, _) = rest.partial_shuffle(&mut rng, target);
    let train = chosen.to_vec();
    Ok(SplitResult::from_parts(config.clone(), train, validation, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    IdsValid,
    Disjoint,
    ExactK,
    PetDisjoint,
    CategoryDisjoint,
    EqualizedTrainSize,
    PoolWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: CheckKind,
    pub passed: bool,
    pub detail: String,
    /// Record ids witnessing a failure.
    pub counterexamples: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, kind: CheckKind) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == kind)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, check: CheckKind, passed: bool, detail: String, counterexamples: Vec<usize>) {
        self.checks.push(CheckResult {
            check,
            passed,
            detail,
            counterexamples,
        });
    }
}

/// Machine-checks a split against the invariants of its regime. Failures are
/// reported as data with witnessing record ids.
pub fn verify_split(corpus: &Corpus, split: &SplitResult) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = corpus.len();
    let parts = [&split.train, &split.validation, &split.test];

    let invalid: Vec<usize> = parts
        .iter()
        .flat_map(|p| p.iter())
        .copied()
        .filter(|&id| id >= n)
        .collect();
    report.push(
        CheckKind::IdsValid,
        invalid.is_empty(),
        format!("{} ids outside 0..{n}", invalid.len()),
        invalid.clone(),
    );
    if !invalid.is_empty() {
        return report;
    }

    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    for part in parts {
        for &id in part {
            *seen.entry(id).or_insert(0) += 1;
        }
    }
    let repeated: Vec<usize> = seen.iter().filter(|(_, &c)| c > 1).map(|(&id, _)| id).collect();
    report.push(
        CheckKind::Disjoint,
        repeated.is_empty(),
        format!(
            "{} ids appear in more than one part (or twice in one part)",
            repeated.len()
        ),
        repeated,
    );

    let records = corpus.records();
    let held_out = || split.validation.iter().chain(split.test.iter()).copied();
    let mut train_counts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &id in &split.train {
        train_counts.entry(records[id].pet_term.as_str()).or_default().push(id);
    }
    let held_pets: BTreeSet<&str> = held_out().map(|id| records[id].pet_term.as_str()).collect();
    let config = &split.config;

    match config.setting {
        Setting::KShot => {
            let k = config.k;
            let mut bad_pets = Vec::new();
            let mut witnesses = Vec::new();
            for pet in &held_pets {
                let in_train = train_counts.get(pet).map(Vec::as_slice).unwrap_or(&[]);
                if in_train.len() != k {
                    bad_pets.push(format!("{pet} ({}x)", in_train.len()));
                    witnesses.extend(held_out().filter(|&id| records[id].pet_term == *pet));
                    witnesses.extend_from_slice(in_train);
                }
            }
            let detail = if bad_pets.is_empty() {
                format!(
                    "all {} held-out PETs appear exactly {k} times in train",
                    held_pets.len()
                )
            } else {
                format!("PETs not appearing exactly {k} times in train: {}", bad_pets.join(", "))
            };
            report.push(CheckKind::ExactK, bad_pets.is_empty(), detail, witnesses);
        }
        Setting::ZeroShotRandom => {
            let shared: Vec<&str> = held_pets
                .iter()
                .copied()
                .filter(|p| train_counts.contains_key(p))
                .collect();
            let witnesses = shared.iter().flat_map(|p| train_counts[p].iter().copied()).collect();
            report.push(
                CheckKind::PetDisjoint,
                shared.is_empty(),
                if shared.is_empty() {
                    "train and held-out PET sets are disjoint".into()
                } else {
                    format!("PETs in both train and held-out: {}", shared.join(", "))
                },
                witnesses,
            );
        }
        Setting::ZeroShotType => {
            let holdout = config.holdout_category.as_deref().unwrap_or_default();
            let mut witnesses: Vec<usize> = split
                .train
                .iter()
                .copied()
                .filter(|&id| records[id].category == holdout)
                .collect();
            witnesses.extend(held_out().filter(|&id| records[id].category != holdout));
            report.push(
                CheckKind::CategoryDisjoint,
                witnesses.is_empty(),
                format!("{} rows violate the `{holdout}` holdout", witnesses.len()),
                witnesses,
            );
            let expected = equalized_train_size(corpus);
            report.push(
                CheckKind::EqualizedTrainSize,
                split.train.len() == expected,
                format!("train size {}, equalized size {expected}", split.train.len()),
                vec![],
            );
        }
        Setting::Standard => {}
    }

    if matches!(config.setting, Setting::KShot | Setting::ZeroShotRandom) {
        let pooled = split.validation.len() + split.test.len();
        let (lower, upper) = config.pool_bounds(n);
        let eps = 1e-9;
        let ok = pooled as f64 >= lower - eps && pooled as f64 <= upper + eps;
        report.push(
            CheckKind::PoolWindow,
            ok,
            format!(
                "pool {pooled} rows ({:.4} of corpus), window [{lower:.2}, {upper:.2}]",
                pooled as f64 / n.max(1) as f64
            ),
            vec![],
        );
    }
    report
}
