//! Average test size and unique test PETs per split regime over ten seeds.
//!
//! Run with `cargo run --example dataset_table`.

use petbench::corpus::{generate_synthetic_corpus, SyntheticSpec};
use petbench::runner::{collect_stats, statistics_settings, stats_rows};
use petbench::tables::stats_table;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec::default())?;
    let stats = collect_stats(&corpus, &statistics_settings(&corpus), 10, 0)?;
    let table = stats_table(&stats_rows(&stats))?;
    print!("{}", table.to_text());
    println!();
    print!("{}", table.to_delimited(b'\t'));
    Ok(())
}
