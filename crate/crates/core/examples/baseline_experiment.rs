//! Offline experiment: synthetic corpus, every split regime, native baseline,
//! five replications each, summarized as a results table.
//!
//! Label noise makes most PETs ambiguous, so memorizing the PET is not
//! enough; the context cue words still separate the classes.
//!
//! Run with `cargo run --release --example baseline_experiment`.

use petbench::corpus::{generate_synthetic_corpus, SyntheticSpec};
use petbench::providers::baseline::BaselineConfig;
use petbench::runner::{run_experiment, ExperimentConfig, ProviderSpec};
use petbench::splitter::SplitConfig;
use petbench::tables::results_table;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let corpus = generate_synthetic_corpus(&SyntheticSpec {
        label_noise: 0.1,
        ..Default::default()
    })?;
    let corpus_path = dir.path().join("corpus.jsonl");
    corpus.write_jsonl(std::fs::File::create(&corpus_path)?)?;

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

    let mut cells = Vec::new();
    for (i, split) in settings.into_iter().enumerate() {
        let config = ExperimentConfig {
            corpus: corpus_path.clone(),
            markers: Default::default(),
            split,
            replications: 5,
            provider: ProviderSpec::Baseline(BaselineConfig::default()),
            template: "default".into(),
            template_file: None,
            demonstrations: None,
            phrase_lists: None,
            output_dir: dir.path().join(format!("run-{i}")),
        };
        cells.push(run_experiment(&config)?.result_cell());
    }
    print!("{}", results_table(&cells)?.to_text());
    Ok(())
}
