//! Map free-text model responses to binary labels.
//!
//! Run with `cargo run --example map_responses`.

use petbench::response_mapper::{map_batch, map_response, PhraseLists};

fn main() {
    let lists = PhraseLists::default();
    let responses = [
        "Yes, it is.",
        "no",
        "The phrase \"passed away\" is used euphemistically here.",
        "In this sentence the word is not a euphemism.",
        "I don’t think so.",
        "I'm not sure.",
        "🙂",
    ];
    for r in responses {
        let m = map_response(r, &lists);
        println!(
            "{:<60} -> {:?} via {:?} {}",
            format!("{r:?}"),
            m.value,
            m.rule,
            m.matched_phrase.unwrap_or_default()
        );
    }
    let batch = map_batch(&responses, &lists);
    println!("exclusion rate {:.3}", batch.exclusion_rate);
    if let Some(w) = batch.warning {
        println!("warning: {w}");
    }
}
