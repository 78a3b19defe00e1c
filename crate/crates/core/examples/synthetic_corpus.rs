//! Generate a synthetic PET corpus, save it as JSON lines and load it back.
//!
//! Run with `cargo run --example synthetic_corpus`.

use petbench::corpus::{build_pet_index, generate_synthetic_corpus, load_corpus_path, MarkerConfig, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec {
        num_pets: 60,
        label_noise: 0.05,
        seed: 42,
        ..Default::default()
    };
    let corpus = generate_synthetic_corpus(&spec)?;
    let index = build_pet_index(&corpus);
    println!("{} sentences, {} PETs", corpus.len(), index.n());
    for (category, size) in corpus.category_sizes() {
        println!("  {category:<28} {size:>4}");
    }
    for record in &corpus.records()[..3] {
        println!("  [{}] label={} {}", record.record_id, record.label, record.sentence);
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("corpus.jsonl");
    corpus.write_jsonl(std::fs::File::create(&path)?)?;
    let reloaded = load_corpus_path(&path, &MarkerConfig::default())?;
    assert_eq!(reloaded.records(), corpus.records());
    println!("round trip ok, sha256 {}", reloaded.source_meta.sha256);
    Ok(())
}
