//! Score an external model that speaks the line-delimited JSON protocol.
//!
//! The example re-launches itself with `--child` to play the external model:
//! a majority-class predictor that answers in free text, so its replies also
//! pass through the response mapper.
//!
//! Run with `cargo run --example subprocess_provider`.

use std::io;

use petbench::corpus::{generate_synthetic_corpus, SyntheticSpec};
use petbench::metrics::score;
use petbench::providers::subprocess::{predict_via_subprocess, serve, ChildModel, ChildReply, SubprocessConfig};
use petbench::providers::{EvalRow, PredictionRequest, TrainRow};
use petbench::response_mapper::PhraseLists;
use petbench::splitter::{split, SplitConfig};

#[derive(Default)]
struct Majority {
    euphemistic: bool,
}

impl ChildModel for Majority {
    fn train(&mut self, rows: &[TrainRow]) -> petbench::providers::Result<()> {
        let ones = rows.iter().filter(|r| r.label == 1).count();
        self.euphemistic = 2 * ones >= rows.len();
        Ok(())
    }

    fn predict(&self, row: &EvalRow) -> ChildReply {
        let raw = if self.euphemistic {
            format!("I think so, \"{}\" is used euphemistically.", row.pet_term)
        } else {
            "No.".to_string()
        };
        ChildReply {
            record_id: row.record_id,
            label: None,
            raw: Some(raw),
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if std::env::args().any(|a| a == "--child") {
        serve(io::stdin().lock(), io::stdout().lock(), &mut Majority::default())?;
        return Ok(());
    }

    let corpus = generate_synthetic_corpus(&SyntheticSpec::default())?;
    let s = split(&corpus, &SplitConfig::zeroshot_random(3))?;
    let request = PredictionRequest::from_split(&corpus, &s);
    let config = SubprocessConfig {
        command: vec![
            std::env::current_exe()?.to_string_lossy().into_owned(),
            "--child".into(),
        ],
        timeout_secs: 60,
    };
    let predictions = predict_via_subprocess(&config, &request, &PhraseLists::default())?;
    println!("first reply: {:?}", predictions[0].raw);

    let gold: Vec<u8> = s.test.iter().map(|&id| corpus.records()[id].label).collect();
    let pred: Vec<_> = predictions.iter().map(|p| p.label.value).collect();
    let report = score(&gold, &pred)?;
    println!(
        "{} test rows: macro P {:.3} R {:.3} F1 {:.3}",
        gold.len(),
        report.macro_avg.precision,
        report.macro_avg.recall,
        report.macro_avg.f1
    );
    Ok(())
}
