//! Acceptance suite. Prints one status line per criterion and exits non-zero
//! when any criterion fails.
//!
//! Set `PETBENCH_REFERENCE_CORPUS` to the shared-task corpus file to also
//! compare split statistics against the published dataset table.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use petbench::corpus::{self, generate_synthetic_corpus, read_jsonl, Corpus, MarkerConfig, SyntheticSpec};
use petbench::metrics::{confusion, macro_prf, per_class_prf, score};
use petbench::providers::baseline::BaselineConfig;
use petbench::response_mapper::{map_batch, map_response, LabelValue, PhraseLists};
use petbench::runner::{collect_stats, run_experiment, ExperimentConfig, ProviderSpec};
use petbench::splitter::{equalized_train_size, split, verify_split, SplitConfig, SplitResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        status: Status::Pass,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        status: Status::Fail,
        detail: detail.into(),
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("split invariants over 100 seeds", split_invariants),
        ("dataset table on the reference corpus", reference_table),
        (
            "type-based sizes on a reference-shaped corpus",
            reference_shaped_type_split,
        ),
        ("response mapper fixture", mapper_fixture),
        ("metrics against brute force", metrics_oracle),
        ("offline end-to-end run", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| fail("panicked"));
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!(
            "{tag} [{}] {name}: {} ({:.2}s)",
            i + 1,
            outcome.detail,
            started.elapsed().as_secs_f64()
        );
    }
    println!(
        "NOTE not reproduced here: the published RoBERTa and GPT-3 scores (e.g. RoBERTa-large zero-shot F1 0.740, \
         GPT-3 k=3 F1 0.617) need fine-tuned large encoders and a retired commercial model. External models plugged \
         into the subprocess or HTTP providers are scored with the same splits, response mapping and macro metrics \
         checked above."
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn pet_of(corpus: &Corpus, id: usize) -> &str {
    &corpus.records()[id].pet_term
}

/// Independent re-check of the structural split properties.
fn structural_errors(corpus: &Corpus, s: &SplitResult) -> Vec<String> {
    let mut errors = Vec::new();
    let n = corpus.len();
    let parts = [&s.train, &s.validation, &s.test];
    let mut seen = BTreeSet::new();
    for part in parts {
        for &id in part.iter() {
            if id >= n || !seen.insert(id) {
                errors.push(format!("id {id} out of range or repeated"));
            }
        }
    }
    let pooled: Vec<usize> = s.validation.iter().chain(&s.test).copied().collect();
    let pooled_pets: BTreeSet<&str> = pooled.iter().map(|&id| pet_of(corpus, id)).collect();
    let cfg = &s.config;
    match cfg.setting.as_str() {
        "kshot" | "zeroshot-random" => {
            let share = pooled.len() as f64 / n as f64;
            if !(0.28..=0.32).contains(&share) {
                errors.push(format!("pool share {share:.4} outside [0.28, 0.32]"));
            }
            let mut train_count: BTreeMap<&str, usize> = BTreeMap::new();
            for &id in &s.train {
                *train_count.entry(pet_of(corpus, id)).or_default() += 1;
            }
            let want = if cfg.setting.as_str() == "kshot" { cfg.k } else { 0 };
            for pet in &pooled_pets {
                let got = train_count.get(pet).copied().unwrap_or(0);
                if got != want {
                    errors.push(format!("pet {pet}: {got} train rows, expected {want}"));
                }
            }
            // every sentence of a pooled PET is accounted for
            for (id, r) in corpus.records().iter().enumerate() {
                if pooled_pets.contains(r.pet_term.as_str()) && !seen.contains(&id) {
                    errors.push(format!("row {id} of pooled pet dropped"));
                }
            }
        }
        "zeroshot-type" => {
            let held = cfg.holdout_category.as_deref().unwrap_or_default();
            let t_star = corpus.category_sizes().values().map(|m| n - m).min().unwrap_or(0);
            if s.train.len() != t_star {
                errors.push(format!("train size {} != {t_star}", s.train.len()));
            }
            if s.train.iter().any(|&id| corpus.records()[id].category == held) {
                errors.push("held-out category in train".into());
            }
            if pooled.iter().any(|&id| corpus.records()[id].category != held) {
                errors.push("foreign category in pool".into());
            }
            let held_rows = corpus.records().iter().filter(|r| r.category == held).count();
            if pooled.len() != held_rows {
                errors.push("held-out category not fully pooled".into());
            }
        }
        _ => {}
    }
    errors
}

fn split_invariants() -> Outcome {
    let started = Instant::now();
    let mut splits = 0;
    let mut problems: Vec<String> = Vec::new();
    for seed in 0..100u64 {
        let corpus = generate_synthetic_corpus(&SyntheticSpec {
            num_pets: 125 + (seed % 10) as usize,
            sentences_per_pet: (10, 20),
            seed: 1000 + seed,
            ..Default::default()
        })
        .expect("synthetic corpus");
        let mut configs = vec![
            SplitConfig::kshot(1, seed),
            SplitConfig::kshot(3, seed),
            SplitConfig::zeroshot_random(seed),
        ];
        configs.extend(
            corpus
                .categories()
                .iter()
                .map(|c| SplitConfig::zeroshot_type(c.clone(), seed)),
        );
        for cfg in configs {
            splits += 1;
            let s = match split(&corpus, &cfg) {
                Ok(s) => s,
                Err(e) => {
                    problems.push(format!("seed {seed} {}: {e}", cfg.label()));
                    continue;
                }
            };
            let report = verify_split(&corpus, &s);
            if !report.passed() {
                problems.push(format!(
                    "seed {seed} {}: {:?}",
                    cfg.label(),
                    report.failures().collect::<Vec<_>>()
                ));
            }
            for e in structural_errors(&corpus, &s) {
                problems.push(format!("seed {seed} {}: {e}", cfg.label()));
            }
        }
    }
    let elapsed = started.elapsed();
    if let Some(first) = problems.first() {
        return fail(format!(
            "{} problems in {splits} splits, first: {first}",
            problems.len()
        ));
    }
    check(
        elapsed < Duration::from_secs(60),
        format!("{splits} splits verified in {:.1}s", elapsed.as_secs_f64()),
    )
}

const PUBLISHED_TYPE_SIZES: [(&str, usize, usize); 7] = [
    // (category key, category rows, test size)
    ("death", 348, 174),
    ("sexual", 90, 45),
    ("employment", 352, 176),
    ("politics", 322, 161),
    ("bodily", 52, 26),
    ("physical", 598, 299),
    ("substances", 176, 88),
];
const PUBLISHED_TRAIN_SIZE: usize = 1367;

fn find_category<'a>(corpus: &'a Corpus, key: &str) -> Option<&'a String> {
    corpus.categories().iter().find(|c| c.to_lowercase().starts_with(key))
}

fn type_sizes_against_published(corpus: &Corpus) -> Vec<String> {
    let mut problems = Vec::new();
    let t_star = equalized_train_size(corpus);
    if t_star != PUBLISHED_TRAIN_SIZE {
        problems.push(format!(
            "equalized train size is {t_star}, published {PUBLISHED_TRAIN_SIZE}"
        ));
    }
    for (key, _, test) in PUBLISHED_TYPE_SIZES {
        let Some(category) = find_category(corpus, key) else {
            problems.push(format!("no category matching `{key}`"));
            continue;
        };
        match split(corpus, &SplitConfig::zeroshot_type(category.clone(), 0)) {
            Ok(s) => {
                if s.test.len() != test {
                    problems.push(format!("{category}: test {} != {test}", s.test.len()));
                }
                if s.train.len() != PUBLISHED_TRAIN_SIZE {
                    problems.push(format!("{category}: train {} != {PUBLISHED_TRAIN_SIZE}", s.train.len()));
                }
            }
            Err(e) => problems.push(format!("{category}: {e}")),
        }
    }
    problems
}

fn reference_table() -> Outcome {
    let Ok(path) = std::env::var("PETBENCH_REFERENCE_CORPUS") else {
        return Outcome {
            status: Status::Skip,
            detail: "PETBENCH_REFERENCE_CORPUS not set".into(),
        };
    };
    let corpus = match corpus::load_corpus_path(Path::new(&path), &MarkerConfig::default()) {
        Ok(c) => c,
        Err(e) => return fail(format!("{path}: {e}")),
    };
    let mut problems = Vec::new();
    let settings = [
        SplitConfig::standard(0),
        SplitConfig::kshot(1, 0),
        SplitConfig::kshot(3, 0),
        SplitConfig::zeroshot_random(0),
    ];
    let stats = match collect_stats(&corpus, &settings, 10, 0) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    // (expected size, tolerance, expected unique PETs)
    let expected = [
        (295.0, 0.0, None),
        (279.6, 15.0, Some(35.0)),
        (281.2, 15.0, None),
        (280.6, 15.0, Some(34.3)),
    ];
    let mut summary = Vec::new();
    for ((cfg, s), (size, tol, pets)) in stats.iter().zip(expected) {
        summary.push(format!(
            "{} {:.1}/{:.1}",
            cfg.label(),
            s.avg_test_size,
            s.avg_unique_test_pets
        ));
        if (s.avg_test_size - size).abs() > tol {
            problems.push(format!(
                "{}: avg test size {:.1}, expected {size} +/- {tol}",
                cfg.label(),
                s.avg_test_size
            ));
        }
        if let Some(p) = pets {
            if (s.avg_unique_test_pets - p).abs() > 5.0 {
                problems.push(format!(
                    "{}: avg unique PETs {:.1}, expected {p} +/- 5",
                    cfg.label(),
                    s.avg_unique_test_pets
                ));
            }
        }
    }
    problems.extend(type_sizes_against_published(&corpus));
    if problems.is_empty() {
        pass(summary.join(", "))
    } else {
        fail(problems.join("; "))
    }
}

/// A corpus with the published category sizes plus 27 rows in an extra
/// category, so that it has 1965 rows in total.
fn reference_shaped_corpus() -> Corpus {
    let mut sizes: Vec<(String, usize)> = [
        ("death", 348),
        ("sexual activity", 90),
        ("employment", 352),
        ("politics", 322),
        ("bodily functions", 52),
        ("physical/mental attributes", 598),
        ("substances", 176),
    ]
    .iter()
    .map(|(c, m)| (c.to_string(), *m))
    .collect();
    sizes.push(("other".into(), 27));
    let mut text = String::new();
    let mut id = 0;
    for (ci, (category, rows)) in sizes.iter().enumerate() {
        for r in 0..*rows {
            let pet = format!("term{ci}x{}", r / 15);
            let line = serde_json::json!({
                "record_id": id,
                "sentence": format!("Row {r} uses [{pet}] here."),
                "pet_term": pet,
                "label": (r % 3 != 0) as u8,
                "category": category,
                "status": "sometimes_euph",
            });
            text.push_str(&line.to_string());
            text.push('\n');
            id += 1;
        }
    }
    read_jsonl(text.as_bytes(), &MarkerConfig::default()).expect("reference-shaped corpus")
}

fn reference_shaped_type_split() -> Outcome {
    let corpus = reference_shaped_corpus();
    if corpus.len() != 1965 {
        return fail(format!("corpus has {} rows", corpus.len()));
    }
    let mut problems = type_sizes_against_published(&corpus);
    let standard = split(&corpus, &SplitConfig::standard(0)).map(|s| s.test.len());
    if standard.as_ref().ok() != Some(&295) {
        problems.push(format!("standard test size {standard:?} != 295"));
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("train {PUBLISHED_TRAIN_SIZE} for all 7 categories, test sizes 174/45/176/161/26/299/88, standard test 295")
        } else {
            problems.join("; ")
        },
    )
}

const ONE_CLASS: [&str; 25] = [
    "is used euphemistically",
    "can be used euphemistically",
    "is being used euphemistically",
    "may be used euphemistically",
    "might be used euphemistically",
    "is a euphemism",
    "is used as a euphemism",
    "is being used as a euphemism",
    "can be used as a euphemism",
    "may be used as a euphemism",
    "might be used as a euphemism",
    "appears to be a euphemism",
    "appears to be used euphemistically",
    "could be used euphemistically",
    "could be used as a euphemism",
    "could be a euphemism",
    "is considered a euphemism",
    "could be considered a euphemism",
    "can be considered a euphemism",
    "could be seen as a euphemism",
    "can be seen as a euphemism",
    "could be considered euphemistic",
    "can be considered euphemistic",
    "i think so",
    "i believe so",
];

const ZERO_CLASS: [&str; 10] = [
    "not used euphemistically",
    "not being used euphemistically",
    "not a euphemism",
    "not used as a euphemism",
    "not being used as a euphemism",
    "does not appear to be a euphemism",
    "does not appear to be used euphemistically",
    "i don't think so",
    "i don't believe so",
    "i do not think so",
];

const UNMAPPABLE: [&str; 20] = [
    "I'm not sure",
    "",
    "🙂🙂🙂",
    "🤔 ... 🤷",
    "I can't answer that.",
    "Maybe.",
    "It depends on the context.",
    "The sentence describes a funeral.",
    "?!",
    "   \n\t",
    "N/A",
    "Hard to say.",
    "Euphemism detection is a difficult task.",
    "Please rephrase the question.",
    "42",
    "...",
    "Possibly",
    "Unclear",
    "The word appears twice in the sentence.",
    "Nah, hard to tell",
];

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

fn carriers(phrase: &str) -> [String; 3] {
    [
        format!("{} in this context.", capitalize(phrase)),
        format!("Here the term {phrase} given the rest of the sentence."),
        format!("Looking at the whole sentence, the term {}", phrase.to_uppercase()),
    ]
}

fn mapper_fixture() -> Outcome {
    let lists = PhraseLists::default();
    let mut wrong = Vec::new();
    let mut total = 0;
    let mut expect = |text: &str, want: LabelValue| {
        total += 1;
        let got = map_response(text, &lists).value;
        if got != want {
            wrong.push(format!("{text:?} -> {got:?}, expected {want:?}"));
        }
    };
    for p in ONE_CLASS {
        for c in carriers(p) {
            expect(&c, LabelValue::One);
        }
    }
    for p in ZERO_CLASS {
        for c in carriers(p) {
            expect(&c, LabelValue::Zero);
        }
    }
    for (text, want) in [
        ("Yes", LabelValue::One),
        ("yes.", LabelValue::One),
        ("YES, it is used that way.", LabelValue::One),
        ("\nYes, but it is not a euphemism.", LabelValue::One),
        ("No", LabelValue::Zero),
        ("no.", LabelValue::Zero),
        ("No, it is used literally.", LabelValue::Zero),
        (" No, I think so.", LabelValue::Zero),
    ] {
        expect(text, want);
    }
    for text in UNMAPPABLE {
        expect(text, LabelValue::Unmapped);
    }

    let mut batch: Vec<String> = (0..96)
        .map(|i| {
            if i % 2 == 0 {
                "Yes".to_string()
            } else {
                "No.".to_string()
            }
        })
        .collect();
    batch.extend(UNMAPPABLE[..4].iter().map(|s| s.to_string()));
    let mapped = map_batch(&batch, &lists);
    let rate_ok = mapped.exclusion_rate == 0.04 && mapped.warning.is_none();

    if wrong.is_empty() && rate_ok {
        pass(format!(
            "{total} responses mapped as expected, batch exclusion rate {}",
            mapped.exclusion_rate
        ))
    } else {
        fail(format!(
            "{} wrong (first: {}), batch exclusion rate {}",
            wrong.len(),
            wrong.first().map_or("-", String::as_str),
            mapped.exclusion_rate
        ))
    }
}

fn brute_prf(gold: &[u8], pred: &[Option<u8>], class: u8) -> [f64; 3] {
    let (mut tp, mut pp, mut ap) = (0usize, 0usize, 0usize);
    for (g, p) in gold.iter().zip(pred) {
        let Some(p) = p else { continue };
        if *p == class {
            pp += 1;
        }
        if *g == class {
            ap += 1;
        }
        if *p == class && *g == class {
            tp += 1;
        }
    }
    let precision = if pp == 0 { 0.0 } else { tp as f64 / pp as f64 };
    let recall = if ap == 0 { 0.0 } else { tp as f64 / ap as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    [precision, recall, f1]
}

fn metrics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2022);
    let mut max_err: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(0..=12);
        let gold: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let pred: Vec<Option<u8>> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.1) {
                    None
                } else {
                    Some(rng.gen_range(0..2))
                }
            })
            .collect();
        let labels: Vec<LabelValue> = pred
            .iter()
            .map(|p| p.map_or(LabelValue::Unmapped, LabelValue::from_binary))
            .collect();
        let pc = per_class_prf(&confusion(&gold, &labels).expect("equal lengths"));
        let m = macro_prf(&pc);
        let b0 = brute_prf(&gold, &pred, 0);
        let b1 = brute_prf(&gold, &pred, 1);
        let got = [
            pc.class0.precision,
            pc.class0.recall,
            pc.class0.f1,
            pc.class1.precision,
            pc.class1.recall,
            pc.class1.f1,
            m.precision,
            m.recall,
            m.f1,
        ];
        let want = [
            b0[0],
            b0[1],
            b0[2],
            b1[0],
            b1[1],
            b1[2],
            (b0[0] + b1[0]) / 2.0,
            (b0[1] + b1[1]) / 2.0,
            (b0[2] + b1[2]) / 2.0,
        ];
        for (g, w) in got.iter().zip(want) {
            max_err = max_err.max((g - w).abs());
        }
    }
    // gold entirely euphemistic: class 1 precision is 1, class 0 precision is 0
    let gold = [1u8; 26];
    let all_one = score(&gold, &[LabelValue::One; 26])
        .expect("equal lengths")
        .macro_avg
        .precision;
    let mut mixed = vec![LabelValue::One; 26];
    mixed[..9].fill(LabelValue::Zero);
    let skewed = score(&gold, &mixed).expect("equal lengths").macro_avg.precision;
    check(
        max_err <= 1e-12 && all_one == 0.5 && skewed == 0.5,
        format!("1000 random pairs, max abs error {max_err:e}; degenerate macro precision {all_one} and {skewed}"),
    )
}

fn end_to_end() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().expect("temp dir");
    let corpus = generate_synthetic_corpus(&SyntheticSpec::default()).expect("synthetic corpus");
    let corpus_path = dir.path().join("synthetic.jsonl");
    corpus
        .write_jsonl(fs::File::create(&corpus_path).expect("corpus file"))
        .expect("write corpus");
    let config = ExperimentConfig {
        corpus: corpus_path,
        markers: MarkerConfig::default(),
        split: SplitConfig::zeroshot_random(7),
        replications: 5,
        provider: ProviderSpec::Baseline(BaselineConfig::default()),
        template: "default".into(),
        template_file: None,
        demonstrations: None,
        phrase_lists: None,
        output_dir: dir.path().join("run"),
    };
    let report_path = config.output_dir.join("report.json");
    let first = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let bytes = fs::read(&report_path).expect("report written");
    if let Err(e) = run_experiment(&config) {
        return fail(format!("rerun: {e}"));
    }
    let identical = fs::read(&report_path).expect("report written") == bytes;
    let f1 = first.aggregate.macro_avg.f1;
    let elapsed = started.elapsed();
    check(
        first.replications.len() == 5 && f1.mean >= 0.95 && identical && elapsed < Duration::from_secs(120),
        format!(
            "5 replications, macro F1 {:.3} (std {:.3}), rerun byte-identical: {identical}",
            f1.mean, f1.std
        ),
    )
}
