//! Render zero-shot and few-shot prompts for a k-shot split.
//!
//! Run with `cargo run --example prompts`.

use petbench::corpus::{generate_synthetic_corpus, SyntheticSpec};
use petbench::prompting::{
    render_few_shot, render_zero_shot, select_demonstrations_from, DemoSelection, DemonstrationPolicy, TemplateRegistry,
};
use petbench::splitter::{split, SplitConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec {
        num_pets: 30,
        ..Default::default()
    })?;
    let s = split(&corpus, &SplitConfig::kshot(3, 5))?;
    let query = &corpus.records()[s.test[0]];
    let registry = TemplateRegistry::default();

    for name in registry.names() {
        println!("--- {name} (zero-shot)");
        println!("{}", render_zero_shot(query, registry.get(name)?)?);
    }

    let policy = DemonstrationPolicy {
        policy: DemoSelection::SamePet,
        count: 3,
        seed: 0,
    };
    let demos = select_demonstrations_from(query, &s.train, &corpus, &policy)?;
    println!("--- default (3 same-PET demonstrations)");
    println!("{}", render_few_shot(query, &demos, registry.get("default")?)?);
    Ok(())
}
