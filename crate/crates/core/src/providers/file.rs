//! Predictions read from a JSON-lines file.
//!
//! Each line is `{"record_id": 17, "label": 1}` or `{"record_id": 17, "raw": "Yes, ..."}`.
//! Raw-only lines go through the response mapper; a line carrying both uses
//! the label and keeps the raw text.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{align_predictions, Prediction, PredictionRequest, Predictor, ProviderError, Result};
use crate::response_mapper::{map_response, MappedLabel, PhraseLists};

#[derive(Deserialize)]
struct Line {
    record_id: usize,
    #[serde(default)]
    label: Option<u8>,
    #[serde(default)]
    raw: Option<String>,
}

pub fn parse_predictions(text: &str, lists: &PhraseLists) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(line).map_err(|e| ProviderError::ParseError {
            line: line_no,
            message: e.to_string(),
        })?;
        let label = match (parsed.label, &parsed.raw) {
            (Some(l @ (0 | 1)), _) => MappedLabel::direct(l),
            (Some(other), _) => {
                return Err(ProviderError::ParseError {
                    line: line_no,
                    message: format!("label {other} is not 0 or 1"),
                })
            }
            (None, Some(raw)) => map_response(raw, lists),
            (None, None) => {
                return Err(ProviderError::ParseError {
                    line: line_no,
                    message: "line has neither `label` nor `raw`".into(),
                })
            }
        };
        out.push(Prediction {
            record_id: parsed.record_id,
            raw: parsed.raw,
            label,
        });
    }
    Ok(out)
}

pub fn predict_from_file(path: &Path, eval_ids: &[usize], lists: &PhraseLists) -> Result<Vec<Prediction>> {
    let text = fs::read_to_string(path)?;
    align_predictions(
        eval_ids,
        parse_predictions(&text, lists)?,
        ProviderError::MissingPrediction,
    )
}

pub struct FilePredictor {
    pub path: PathBuf,
    pub lists: PhraseLists,
}

impl Predictor for FilePredictor {
    fn name(&self) -> &str {
        "file"
    }

    fn predict(&self, request: &PredictionRequest) -> Result<Vec<Prediction>> {
        predict_from_file(&self.path, &request.eval_ids(), &self.lists)
    }
}
