//! Per-class and macro metrics, plus aggregation over replications.
//!
//! Run with `cargo run --example score_metrics`.

use petbench::metrics::{aggregate_replications, score};
use petbench::response_mapper::LabelValue::{self, One, Unmapped, Zero};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gold = [1, 1, 0, 1, 0, 1, 1, 0];
    let runs: [[LabelValue; 8]; 3] = [
        [One, One, Zero, Zero, Zero, One, One, One],
        [One, Unmapped, Zero, One, One, One, One, Zero],
        [One; 8],
    ];
    let mut reports = Vec::new();
    for (i, pred) in runs.iter().enumerate() {
        let r = score(&gold, pred)?;
        println!(
            "run {i}: macro P {:.3} R {:.3} F1 {:.3}  (class0 F1 {:.3}, class1 F1 {:.3}, excluded {})",
            r.macro_avg.precision,
            r.macro_avg.recall,
            r.macro_avg.f1,
            r.per_class.class0.f1,
            r.per_class.class1.f1,
            r.counts.excluded
        );
        reports.push(r);
    }
    let agg = aggregate_replications(&reports)?;
    println!(
        "mean macro F1 {:.3} +/- {:.3} over {} runs",
        agg.macro_avg.f1.mean, agg.macro_avg.f1.std, agg.n_replications
    );
    Ok(())
}
