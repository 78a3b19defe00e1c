//! Few-shot and zero-shot euphemism detection benchmarks.
//!
//! The crate builds train/validation/test splits over corpora of sentences
//! with a marked potentially euphemistic term (PET), renders prompts for
//! generative models, maps their free-text answers to labels, and scores
//! predictions with macro precision, recall and F1 over seeded replications.
//!
//! Modules follow the pipeline order:
//!
//! * [`corpus`]: loading, indexing, statistics, synthetic corpora
//! * [`splitter`]: standard, k-shot, zero-shot random and zero-shot type splits
//! * [`prompting`]: zero-shot and few-shot prompt templates
//! * [`response_mapper`]: rule-based answer extraction
//! * [`providers`]: prediction sources (files, subprocesses, HTTP, baseline)
//! * [`metrics`]: confusion counts and macro metrics
//! * [`runner`] and [`tables`]: experiments, artifacts and report tables
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod corpus;
pub mod metrics;
pub mod prompting;
pub mod providers;
pub mod response_mapper;
pub mod rng;
pub mod runner;
pub mod splitter;
pub mod tables;
