//! Zero-shot and few-shot prompt rendering.
//!
//! A few-shot prompt repeats the zero-shot question once per demonstration,
//! each followed by ` Yes` or ` No` and a newline, then asks the query:
//!
//! ```text
//! Is the word passed on used euphemistically in the following sentence: Grandpa passed on. Yes\n
//! Is the word passed away used euphemistically in the following sentence: My uncle passed away last night.
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, PetRecord};
use crate::rng;

pub const PET_PLACEHOLDER: &str = "{PET}";
pub const SENT_PLACEHOLDER: &str = "{SENT}";

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("template `{template}` has unbound placeholder `{placeholder}`")]
    UnboundPlaceholder { template: String, placeholder: String },
    #[error("template `{0}` does not contain {{SENT}}")]
    MissingSentence(String),
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("record {record_id}: needed {needed} demonstrations, {available} available")]
    InsufficientDemonstrations {
        record_id: usize,
        needed: usize,
        available: usize,
    },
    #[error("template registry: {0}")]
    Registry(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = PromptError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub name: String,
    pub pattern: String,
    #[serde(default)]
    pub answer_suffix: Option<String>,
}

impl PromptTemplate {
    pub fn new(name: impl Into<String>, pattern: impl Into<String>, answer_suffix: Option<String>) -> Result<Self> {
        let template = PromptTemplate {
            name: name.into(),
            pattern: pattern.into(),
            answer_suffix,
        };
        if !template.pattern.contains(SENT_PLACEHOLDER) {
            return Err(PromptError::MissingSentence(template.name));
        }
        template.check_placeholders()?;
        Ok(template)
    }

    fn check_placeholders(&self) -> Result<()> {
        let mut rest = self.pattern.as_str();
        while let Some(start) = rest.find('{') {
            let tail = &rest[start..];
            let Some(end) = tail.find('}') else { break };
            let candidate = &tail[..=end];
            let inner = &candidate[1..candidate.len() - 1];
            let looks_like_placeholder = !inner.is_empty() && inner.chars().all(|c| c.is_ascii_uppercase() || c == '_');
            if looks_like_placeholder && candidate != PET_PLACEHOLDER && candidate != SENT_PLACEHOLDER {
                return Err(PromptError::UnboundPlaceholder {
                    template: self.name.clone(),
                    placeholder: candidate.to_string(),
                });
            }
            rest = &tail[1..];
        }
        Ok(())
    }

    pub fn default_template() -> Self {
        PromptTemplate {
            name: "default".into(),
            pattern: "Is the word {PET} used euphemistically in the following sentence: {SENT}".into(),
            answer_suffix: None,
        }
    }

    pub fn contains_euphemism() -> Self {
        PromptTemplate {
            name: "contains-euphemism".into(),
            pattern: "Does this sentence contain a euphemism: {SENT}".into(),
            answer_suffix: None,
        }
    }

    pub fn default_yesno_suffix() -> Self {
        PromptTemplate {
            answer_suffix: Some("(Yes/No)".into()),
            name: "default-yesno-suffix".into(),
            ..Self::default_template()
        }
    }
}

/// Name → template lookup, seeded with the three built-in templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateRegistry {
    templates: BTreeMap<String, PromptTemplate>,
}

impl Default for TemplateRegistry {
    fn default() -> Self {
        let mut templates = BTreeMap::new();
        for t in [
            PromptTemplate::default_template(),
            PromptTemplate::contains_euphemism(),
            PromptTemplate::default_yesno_suffix(),
        ] {
            templates.insert(t.name.clone(), t);
        }
        TemplateRegistry { templates }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TemplateEntry {
    Pattern(String),
    Full {
        pattern: String,
        #[serde(default)]
        answer_suffix: Option<String>,
    },
}

impl TemplateRegistry {
    pub fn register(&mut self, template: PromptTemplate) -> Result<()> {
        let checked = PromptTemplate::new(template.name, template.pattern, template.answer_suffix)?;
        self.templates.insert(checked.name.clone(), checked);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&PromptTemplate> {
        self.templates
            .get(name)
            .ok_or_else(|| PromptError::UnknownTemplate(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    /// Adds templates from a TOML or JSON table mapping name → pattern (or
    /// name → `{pattern, answer_suffix}`).
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        let entries: BTreeMap<String, TemplateEntry> = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| PromptError::Registry(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| PromptError::Registry(e.to_string()))?
        };
        for (name, entry) in entries {
            let (pattern, answer_suffix) = match entry {
                TemplateEntry::Pattern(p) => (p, None),
                TemplateEntry::Full { pattern, answer_suffix } => (pattern, answer_suffix),
            };
            self.register(PromptTemplate::new(name, pattern, answer_suffix)?)?;
        }
        Ok(())
    }
}

pub fn render_zero_shot(record: &PetRecord, template: &PromptTemplate) -> Result<String> {
    if !template.pattern.contains(SENT_PLACEHOLDER) {
        return Err(PromptError::MissingSentence(template.name.clone()));
    }
    template.check_placeholders()?;
    let sentence = record.plain_sentence();
    let mut out = template
        .pattern
        .replace(PET_PLACEHOLDER, &record.pet_term)
        .replace(SENT_PLACEHOLDER, &sentence);
    if let Some(suffix) = &template.answer_suffix {
        out.push(' ');
        out.push_str(suffix);
    }
    Ok(out)
}

pub fn render_few_shot(record: &PetRecord, demos: &[&PetRecord], template: &PromptTemplate) -> Result<String> {
    let mut out = String::new();
    for demo in demos {
        out.push_str(&render_zero_shot(demo, template)?);
        out.push_str(if demo.label == 1 { " Yes" } else { " No" });
        out.push('\n');
    }
    out.push_str(&render_zero_shot(record, template)?);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoSelection {
    SamePet,
    RandomTrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemonstrationPolicy {
    pub policy: DemoSelection,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

impl DemonstrationPolicy {
    pub fn none() -> Self {
        DemonstrationPolicy {
            policy: DemoSelection::RandomTrain,
            count: 0,
            seed: 0,
        }
    }
}

/// Picks demonstrations for `query` out of `train`. The query itself is
/// never returned. Each query draws from its own seeded stream, so the
/// choice does not depend on the order queries are processed in.
pub fn select_demonstrations<'a>(
    query: &PetRecord,
    train: &[&'a PetRecord],
    policy: &DemonstrationPolicy,
) -> Result<Vec<&'a PetRecord>> {
    if policy.count == 0 {
        return Ok(Vec::new());
    }
    let mut pool: Vec<&PetRecord> = train
        .iter()
        .copied()
        .filter(|r| r.record_id != query.record_id)
        .filter(|r| policy.policy == DemoSelection::RandomTrain || r.pet_term == query.pet_term)
        .collect();
    if pool.len() < policy.count {
        return Err(PromptError::InsufficientDemonstrations {
            record_id: query.record_id,
            needed: policy.count,
            available: pool.len(),
        });
    }
    pool.sort_by_key(|r| r.record_id);
    let mut rng = rng::derived(policy.seed, query.record_id as u64);
    let (chosen, _) = pool.partial_shuffle(&mut rng, policy.count);
    Ok(chosen.to_vec())
}

/// [`select_demonstrations`] over a corpus and a set of train record ids.
pub fn select_demonstrations_from<'a>(
    query: &PetRecord,
    train_ids: &[usize],
    corpus: &'a Corpus,
    policy: &DemonstrationPolicy,
) -> Result<Vec<&'a PetRecord>> {
    let train: Vec<&PetRecord> = train_ids.iter().filter_map(|&id| corpus.get(id)).collect();
    select_demonstrations(query, &train, policy)
}

/// Same-PET demonstrations when the query's PET has any in train, otherwise
/// random train demonstrations. `count` is capped at what same-PET offers.
pub fn select_with_fallback<'a>(
    query: &PetRecord,
    train: &[&'a PetRecord],
    count: usize,
    seed: u64,
) -> Result<Vec<&'a PetRecord>> {
    let same = train
        .iter()
        .filter(|r| r.pet_term == query.pet_term && r.record_id != query.record_id)
        .count();
    let policy = if same > 0 {
        DemonstrationPolicy {
            policy: DemoSelection::SamePet,
            count: count.min(same),
            seed,
        }
    } else {
        DemonstrationPolicy {
            policy: DemoSelection::RandomTrain,
            count,
            seed,
        }
    };
    select_demonstrations(query, train, &policy)
}
