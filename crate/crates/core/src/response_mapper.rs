//! Rule-based mapping of free-text model responses to binary labels.
//!
//! Rules, first match wins:
//!
//! 1. lowercase, normalize curly apostrophes, strip leading spaces, newlines,
//!    `.`, `,`, `:` and `"`;
//! 2. starts with `yes` → one;
//! 3. starts with `no` but not `not` → zero;
//! 4. contains a zero-class phrase → zero;
//! 5. contains a one-class phrase → one;
//! 6. otherwise unmapped, and excluded from scoring.
//!
//! Zero-class phrases are checked first because several of them extend an
//! affirmative stem (`not being used as a euphemism`).

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_PHRASES: &str = include_str!("../data/phrases-v1.json");

/// Batches whose unmapped share exceeds this emit a warning.
pub const EXCLUSION_WARNING_THRESHOLD: f64 = 0.10;

#[derive(Debug, Error)]
pub enum PhraseListError {
    #[error("phrase list: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("phrase `{0}` is not lowercase")]
    NotLowercase(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelValue {
    One,
    Zero,
    Unmapped,
}

impl LabelValue {
    pub fn as_binary(self) -> Option<u8> {
        match self {
            LabelValue::One => Some(1),
            LabelValue::Zero => Some(0),
            LabelValue::Unmapped => None,
        }
    }

    pub fn from_binary(label: u8) -> Self {
        if label == 1 {
            LabelValue::One
        } else {
            LabelValue::Zero
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingRule {
    YesPrefix,
    NoPrefix,
    ZeroClassPhrase,
    OneClassPhrase,
    /// Label supplied directly by a classifier, no text involved.
    Direct,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappedLabel {
    pub value: LabelValue,
    pub rule: MappingRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_phrase: Option<String>,
}

impl MappedLabel {
    pub fn direct(label: u8) -> Self {
        MappedLabel {
            value: LabelValue::from_binary(label),
            rule: MappingRule::Direct,
            matched_phrase: None,
        }
    }

    pub fn unmapped() -> Self {
        MappedLabel {
            value: LabelValue::Unmapped,
            rule: MappingRule::None,
            matched_phrase: None,
        }
    }

    fn with(value: LabelValue, rule: MappingRule, phrase: Option<&str>) -> Self {
        MappedLabel {
            value,
            rule,
            matched_phrase: phrase.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseLists {
    #[serde(default)]
    pub version: u32,
    pub one_class: Vec<String>,
    pub zero_class: Vec<String>,
}

impl Default for PhraseLists {
    /// The 25 one-class and 10 zero-class phrases shipped in `data/phrases-v1.json`.
    fn default() -> Self {
        PhraseLists::from_json(BUILTIN_PHRASES).expect("builtin phrase list is valid")
    }
}

impl PhraseLists {
    pub fn from_json(text: &str) -> Result<Self, PhraseListError> {
        let lists: PhraseLists = serde_json::from_str(text)?;
        for p in lists.one_class.iter().chain(&lists.zero_class) {
            if *p != p.to_lowercase() {
                return Err(PhraseListError::NotLowercase(p.clone()));
            }
        }
        Ok(lists)
    }

    pub fn load(path: &Path) -> Result<Self, PhraseListError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn clean(raw: &str) -> String {
    let lowered = raw.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'");
    lowered
        .trim_start_matches([' ', '\n', '\r', '\t', '.', ',', ':', '"'])
        .to_string()
}

/// Earliest occurrence of any phrase; ties go to the phrase listed first.
fn earliest<'a>(text: &str, phrases: &'a [String]) -> Option<&'a str> {
    phrases
        .iter()
        .filter_map(|p| text.find(p.as_str()).map(|pos| (pos, p.as_str())))
        .min_by_key(|&(pos, _)| pos)
        .map(|(_, p)| p)
}

pub fn map_response(raw: &str, lists: &PhraseLists) -> MappedLabel {
    let text = clean(raw);
    if text.starts_with("yes") {
        return MappedLabel::with(LabelValue::One, MappingRule::YesPrefix, None);
    }
    if text.starts_with("no") && !text.starts_with("not") {
        return MappedLabel::with(LabelValue::Zero, MappingRule::NoPrefix, None);
    }
    if let Some(p) = earliest(&text, &lists.zero_class) {
        return MappedLabel::with(LabelValue::Zero, MappingRule::ZeroClassPhrase, Some(p));
    }
    if let Some(p) = earliest(&text, &lists.one_class) {
        return MappedLabel::with(LabelValue::One, MappingRule::OneClassPhrase, Some(p));
    }
    MappedLabel::unmapped()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMapping {
    pub labels: Vec<MappedLabel>,
    pub exclusion_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

pub fn exclusion_rate(labels: &[MappedLabel]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let unmapped = labels.iter().filter(|l| l.value == LabelValue::Unmapped).count();
    unmapped as f64 / labels.len() as f64
}

pub fn map_batch<S: AsRef<str>>(raws: &[S], lists: &PhraseLists) -> BatchMapping {
    let labels: Vec<MappedLabel> = raws.iter().map(|r| map_response(r.as_ref(), lists)).collect();
    let rate = exclusion_rate(&labels);
    let warning = (rate > EXCLUSION_WARNING_THRESHOLD).then(|| {
        let msg = format!(
            "{:.1}% of {} responses could not be mapped (threshold {:.0}%)",
            rate * 100.0,
            labels.len(),
            EXCLUSION_WARNING_THRESHOLD * 100.0
        );
        log::warn!("{msg}");
        msg
    });
    BatchMapping {
        labels,
        exclusion_rate: rate,
        warning,
    }
}
