//! Binary confusion counts and per-class / macro precision, recall and F1.
//!
//! Class 1 (euphemistic) is the positive class for the confusion matrix;
//! class 0 metrics use `tn` as their true positives. Any `0/0` is 0, and the
//! macro value of each metric is the unweighted mean over the two classes.
//! Under that convention a skewed test set where every gold and predicted
//! label is 1 scores macro precision exactly 0.5.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::response_mapper::LabelValue;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("gold has {gold} labels but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("no reports to aggregate")]
    EmptyList,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    /// Pairs removed because the prediction was unmapped.
    pub excluded: usize,
}

impl ConfusionCounts {
    pub fn scored(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Unmapped share over scored + excluded pairs.
    pub fn exclusion_rate(&self) -> f64 {
        let total = self.scored() + self.excluded;
        if total == 0 {
            0.0
        } else {
            self.excluded as f64 / total as f64
        }
    }

    /// The same counts seen with class 0 as the positive class.
    pub fn swapped(&self) -> Self {
        ConfusionCounts {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
            excluded: self.excluded,
        }
    }
}

pub fn confusion(gold: &[u8], pred: &[LabelValue]) -> Result<ConfusionCounts, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&g, &p) in gold.iter().zip(pred) {
        match (g == 1, p) {
            (_, LabelValue::Unmapped) => c.excluded += 1,
            (true, LabelValue::One) => c.tp += 1,
            (true, LabelValue::Zero) => c.fn_ += 1,
            (false, LabelValue::One) => c.fp += 1,
            (false, LabelValue::Zero) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerClass {
    pub class0: Prf,
    pub class1: Prf,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn prf(tp: usize, fp: usize, fn_: usize) -> Prf {
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf { precision, recall, f1 }
}

pub fn per_class_prf(c: &ConfusionCounts) -> PerClass {
    PerClass {
        class1: prf(c.tp, c.fp, c.fn_),
        class0: prf(c.tn, c.fn_, c.fp),
    }
}

pub fn macro_prf(per_class: &PerClass) -> Prf {
    let (a, b) = (per_class.class0, per_class.class1);
    Prf {
        precision: (a.precision + b.precision) / 2.0,
        recall: (a.recall + b.recall) / 2.0,
        f1: (a.f1 + b.f1) / 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_class: PerClass,
    #[serde(rename = "macro")]
    pub macro_avg: Prf,
    pub counts: ConfusionCounts,
    pub exclusion_rate: f64,
}

impl MetricsReport {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let per_class = per_class_prf(&counts);
        MetricsReport {
            per_class,
            macro_avg: macro_prf(&per_class),
            counts,
            exclusion_rate: counts.exclusion_rate(),
        }
    }
}

pub fn score(gold: &[u8], pred: &[LabelValue]) -> Result<MetricsReport, MetricsError> {
    Ok(MetricsReport::from_counts(confusion(gold, pred)?))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single replication.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        };
        Summary { mean, std }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PrfSummary {
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
}

impl PrfSummary {
    fn of<'a>(items: impl Iterator<Item = &'a Prf> + Clone) -> Self {
        let pick = |f: fn(&Prf) -> f64| Summary::of(&items.clone().map(f).collect::<Vec<_>>());
        PrfSummary {
            precision: pick(|m| m.precision),
            recall: pick(|m| m.recall),
            f1: pick(|m| m.f1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub n_replications: usize,
    #[serde(rename = "macro")]
    pub macro_avg: PrfSummary,
    pub class0: PrfSummary,
    pub class1: PrfSummary,
    pub exclusion_rate: Summary,
}

pub fn aggregate_replications(reports: &[MetricsReport]) -> Result<AggregateReport, MetricsError> {
    if reports.is_empty() {
        return Err(MetricsError::EmptyList);
    }
    Ok(AggregateReport {
        n_replications: reports.len(),
        macro_avg: PrfSummary::of(reports.iter().map(|r| &r.macro_avg)),
        class0: PrfSummary::of(reports.iter().map(|r| &r.per_class.class0)),
        class1: PrfSummary::of(reports.iter().map(|r| &r.per_class.class1)),
        exclusion_rate: Summary::of(&reports.iter().map(|r| r.exclusion_rate).collect::<Vec<_>>()),
    })
}
