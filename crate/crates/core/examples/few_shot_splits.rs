//! Build k-shot and zero-shot (random) splits and verify their invariants.
//!
//! Run with `cargo run --example few_shot_splits`.

use petbench::corpus::{generate_synthetic_corpus, SyntheticSpec};
use petbench::splitter::{split, verify_split, SplitConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec::default())?;
    let n = corpus.len();
    for config in [
        SplitConfig::standard(1),
        SplitConfig::kshot(1, 1),
        SplitConfig::kshot(3, 1),
        SplitConfig::zeroshot_random(1),
    ] {
        let s = split(&corpus, &config)?;
        let (lo, hi) = config.pool_bounds(n);
        let pool = s.validation.len() + s.test.len();
        let report = verify_split(&corpus, &s);
        println!(
            "{:<16} train {:>4}  val {:>3}  test {:>3}  pool {pool} in [{lo:.0}, {hi:.0}]  checks {}",
            config.label(),
            s.train.len(),
            s.validation.len(),
            s.test.len(),
            if report.passed() { "ok" } else { "FAILED" }
        );
        for failure in report.failures() {
            println!("    {failure:?}");
        }
    }
    Ok(())
}
