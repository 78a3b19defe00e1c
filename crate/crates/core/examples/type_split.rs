//! Hold out one PET category at a time with equalized train sizes.
//!
//! Run with `cargo run --example type_split`.

use petbench::corpus::{generate_synthetic_corpus, SyntheticSpec};
use petbench::splitter::{equalized_train_size, split, verify_split, SplitConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec {
        seed: 9,
        ..Default::default()
    })?;
    println!(
        "every type-based split trains on {} rows",
        equalized_train_size(&corpus)
    );
    for category in corpus.categories() {
        let s = split(&corpus, &SplitConfig::zeroshot_type(category.clone(), 0))?;
        assert!(verify_split(&corpus, &s).passed());
        println!(
            "  {category:<28} train {:>4}  val {:>3}  test {:>3}",
            s.train.len(),
            s.validation.len(),
            s.test.len()
        );
    }
    Ok(())
}
