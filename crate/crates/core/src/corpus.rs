//! PET-annotated corpora: loading, indexing, statistics and synthetic generation.
//!
//! A corpus file is delimited UTF-8 text (comma or tab, detected from the
//! header line) with columns `sentence`, `label`, `category` and an optional
//! `status`. Each sentence marks its potentially euphemistic term (PET) with a
//! marker pair, `[` `]` by default:
//!
//! ```text
//! sentence,label,category,status
//! "My uncle [passed away] last night.",1,death,always euph
//! ```
//!
//! The canonical serialization of a loaded corpus is JSON lines with keys
//! `record_id, sentence, pet_term, label, category, status`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng;
use crate::splitter::SplitResult;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing required column `{0}` in header")]
    MissingColumn(String),
    #[error("row {row}: expected exactly one marked PET span, found {found}")]
    MarkerCountError { row: usize, found: usize },
    #[error("row {row}: marked PET span is empty")]
    EmptyPetSpan { row: usize },
    #[error("row {row}: label `{value}` is not 0 or 1")]
    BadLabel { row: usize, value: String },
    #[error("row {row}: sentence is empty")]
    EmptySentence { row: usize },
    #[error("row {row}: category is empty")]
    EmptyCategory { row: usize },
    #[error("row {row}: pet_term `{pet_term}` does not match marked span `{span}`")]
    PetMismatch { row: usize, pet_term: String, span: String },
    #[error("record ids are not dense: expected {expected}, found {found}")]
    NonDenseIds { expected: usize, found: usize },
    #[error("input is not valid UTF-8: {0}")]
    Encoding(#[from] std::str::Utf8Error),
    #[error("malformed delimited input: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("invalid synthetic corpus spec: {0}")]
    BadSpec(String),
    #[error("no splits supplied")]
    EmptySplitList,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkerConfig {
    pub open: char,
    pub close: char,
}

impl Default for MarkerConfig {
    fn default() -> Self {
        MarkerConfig { open: '[', close: ']' }
    }
}

impl MarkerConfig {
    /// Returns the text between the markers, or the number of marked spans
    /// found when it is not exactly one.
    pub fn extract_span<'a>(&self, sentence: &'a str) -> std::result::Result<&'a str, usize> {
        let opens = sentence.matches(self.open).count();
        let closes = sentence.matches(self.close).count();
        if opens != 1 || closes != 1 {
            return Err(opens.max(closes));
        }
        let start = sentence.find(self.open).unwrap() + self.open.len_utf8();
        let end = sentence.find(self.close).unwrap();
        if end < start {
            return Err(0);
        }
        Ok(&sentence[start..end])
    }

    pub fn strip(&self, sentence: &str) -> String {
        sentence
            .chars()
            .filter(|&c| c != self.open && c != self.close)
            .collect()
    }
}

/// Lowercases and collapses internal whitespace; PET identity for splitting.
pub fn normalize_pet(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PetStatus {
    AlwaysEuph,
    SometimesEuph,
    Unknown,
}

impl PetStatus {
    pub fn parse(raw: &str) -> Self {
        let s = raw.trim().to_lowercase().replace(['_', '-'], " ");
        if s.starts_with("always") {
            PetStatus::AlwaysEuph
        } else if s.starts_with("sometimes") {
            PetStatus::SometimesEuph
        } else {
            PetStatus::Unknown
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetRecord {
    pub record_id: usize,
    pub sentence: String,
    pub pet_term: String,
    pub label: u8,
    pub category: String,
    pub status: PetStatus,
    #[serde(skip, default)]
    pub markers: MarkerConfig,
}

impl PetRecord {
    /// The sentence with its PET markers removed.
    pub fn plain_sentence(&self) -> String {
        self.markers.strip(&self.sentence)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceMeta {
    pub path: Option<String>,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    records: Vec<PetRecord>,
    categories: Vec<String>,
    pub source_meta: SourceMeta,
}

impl Corpus {
    /// Builds a corpus from already-constructed records, checking the record
    /// invariants and that ids are dense `0..len`.
    pub fn from_records(records: Vec<PetRecord>) -> Result<Corpus> {
        for (i, r) in records.iter().enumerate() {
            if r.record_id != i {
                return Err(CorpusError::NonDenseIds {
                    expected: i,
                    found: r.record_id,
                });
            }
            validate_record(r, i + 1)?;
        }
        let categories: BTreeSet<String> = records.iter().map(|r| r.category.clone()).collect();
        let mut hasher = Sha256::new();
        for r in &records {
            hasher.update(serde_json::to_vec(r).expect("record serializes"));
            hasher.update(b"\n");
        }
        Ok(Corpus {
            records,
            categories: categories.into_iter().collect(),
            source_meta: SourceMeta {
                path: None,
                sha256: hex::encode(hasher.finalize()),
            },
        })
    }

    pub fn records(&self) -> &[PetRecord] {
        &self.records
    }

    pub fn get(&self, id: usize) -> Option<&PetRecord> {
        self.records.get(id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct category names, sorted.
    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn category_sizes(&self) -> BTreeMap<&str, usize> {
        let mut sizes = BTreeMap::new();
        for r in &self.records {
            *sizes.entry(r.category.as_str()).or_insert(0) += 1;
        }
        sizes
    }

    /// Writes the canonical JSON-lines serialization.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(|e| CorpusError::Json {
                line: r.record_id + 1,
                source: e,
            })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn validate_record(r: &PetRecord, row: usize) -> Result<()> {
    if r.sentence.trim().is_empty() {
        return Err(CorpusError::EmptySentence { row });
    }
    if r.label > 1 {
        return Err(CorpusError::BadLabel {
            row,
            value: r.label.to_string(),
        });
    }
    if r.category.trim().is_empty() {
        return Err(CorpusError::EmptyCategory { row });
    }
    let span = r
        .markers
        .extract_span(&r.sentence)
        .map_err(|found| CorpusError::MarkerCountError { row, found })?;
    let span = normalize_pet(span);
    if span.is_empty() {
        return Err(CorpusError::EmptyPetSpan { row });
    }
    if span != r.pet_term {
        return Err(CorpusError::PetMismatch {
            row,
            pet_term: r.pet_term.clone(),
            span,
        });
    }
    Ok(())
}

/// Loads a delimited corpus from a stream. Rows are numbered from 1 (the
/// header is row 0) in error messages.
pub fn load_corpus<R: Read>(mut source: R, markers: &MarkerConfig) -> Result<Corpus> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    parse_delimited(&bytes, markers)
}

fn parse_delimited(bytes: &[u8], markers: &MarkerConfig) -> Result<Corpus> {
    let text = std::str::from_utf8(bytes)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let header_line = text.lines().next().unwrap_or("");
    let delimiter = if header_line.contains('\t') { b'\t' } else { b',' };

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_lowercase()).collect();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let sentence_col = column("sentence").ok_or_else(|| CorpusError::MissingColumn("sentence".into()))?;
    let label_col = column("label").ok_or_else(|| CorpusError::MissingColumn("label".into()))?;
    let category_col = column("category").ok_or_else(|| CorpusError::MissingColumn("category".into()))?;
    let status_col = column("status");

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row?;
        let field = |col: usize| row.get(col).unwrap_or("");

        let sentence = field(sentence_col).to_string();
        if sentence.trim().is_empty() {
            return Err(CorpusError::EmptySentence { row: row_no });
        }
        let label = match field(label_col).trim() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(CorpusError::BadLabel {
                    row: row_no,
                    value: other.to_string(),
                })
            }
        };
        let category = field(category_col).trim().to_string();
        let status = status_col
            .map(|c| PetStatus::parse(field(c)))
            .unwrap_or(PetStatus::Unknown);
        let span = markers
            .extract_span(&sentence)
            .map_err(|found| CorpusError::MarkerCountError { row: row_no, found })?;
        let pet_term = normalize_pet(span);

        let record = PetRecord {
            record_id: records.len(),
            sentence,
            pet_term,
            label,
            category,
            status,
            markers: *markers,
        };
        validate_record(&record, row_no)?;
        records.push(record);
    }
    Corpus::from_records(records)
}

/// Reads the canonical JSON-lines serialization back into a corpus.
pub fn read_jsonl<R: Read>(source: R, markers: &MarkerConfig) -> Result<Corpus> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut r: PetRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Json { line: i + 1, source: e })?;
        r.markers = *markers;
        records.push(r);
    }
    Corpus::from_records(records)
}

/// Loads a corpus file, choosing the canonical JSON-lines reader for `.jsonl`
/// paths and the delimited reader otherwise. Records the file hash.
pub fn load_corpus_path(path: &Path, markers: &MarkerConfig) -> Result<Corpus> {
    let bytes = fs::read(path)?;
    let mut corpus = if path.extension().is_some_and(|e| e == "jsonl") {
        read_jsonl(bytes.as_slice(), markers)?
    } else {
        parse_delimited(&bytes, markers)?
    };
    corpus.source_meta = SourceMeta {
        path: Some(path.display().to_string()),
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    Ok(corpus)
}

/// Record ids grouped by normalized PET.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PetIndex {
    pub entries: BTreeMap<String, Vec<usize>>,
}

impl PetIndex {
    /// Number of unique PETs.
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn records_of(&self, pet: &str) -> &[usize] {
        self.entries.get(pet).map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn build_pet_index(corpus: &Corpus) -> PetIndex {
    let mut entries: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for r in corpus.records() {
        entries.entry(r.pet_term.clone()).or_default().push(r.record_id);
    }
    PetIndex { entries }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub n_splits: usize,
    pub avg_test_size: f64,
    pub avg_unique_test_pets: f64,
    /// Fraction of label-1 rows per PET over the whole corpus.
    pub pet_label_purity: BTreeMap<String, f64>,
}

pub fn corpus_stats(corpus: &Corpus, splits: &[SplitResult]) -> Result<StatsReport> {
    if splits.is_empty() {
        return Err(CorpusError::EmptySplitList);
    }
    let n = splits.len() as f64;
    let mut total_size = 0usize;
    let mut total_unique = 0usize;
    for split in splits {
        total_size += split.test.len();
        let pets: BTreeSet<&str> = split
            .test
            .iter()
            .filter_map(|&id| corpus.get(id))
            .map(|r| r.pet_term.as_str())
            .collect();
        total_unique += pets.len();
    }
    let index = build_pet_index(corpus);
    let pet_label_purity = index
        .entries
        .iter()
        .map(|(pet, ids)| {
            let ones = ids.iter().filter(|&&id| corpus.records[id].label == 1).count();
            (pet.clone(), ones as f64 / ids.len() as f64)
        })
        .collect();
    Ok(StatsReport {
        n_splits: splits.len(),
        avg_test_size: total_size as f64 / n,
        avg_unique_test_pets: total_unique as f64 / n,
        pet_label_purity,
    })
}

/// Parameters for [`generate_synthetic_corpus`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_pets: usize,
    /// Inclusive range of sentences generated per PET.
    pub sentences_per_pet: (usize, usize),
    pub categories: Vec<String>,
    /// Probability of flipping each sentence's label away from its PET's label.
    pub label_noise: f64,
    /// Probability that a PET's base label is 1.
    pub euphemistic_share: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// Shaped like the shared-task data: 129 PETs, about 15 sentences each, 7 categories.
    fn default() -> Self {
        SyntheticSpec {
            num_pets: 129,
            sentences_per_pet: (10, 20),
            categories: [
                "death",
                "sexual activity",
                "employment",
                "politics",
                "bodily functions",
                "physical/mental attributes",
                "substances",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            label_noise: 0.0,
            euphemistic_share: 0.6,
            seed: 0,
        }
    }
}

const SYLLABLES: [&str; 12] = [
    "zo", "ka", "vir", "mel", "tu", "dran", "qui", "bes", "lo", "fen", "gar", "ush",
];
/// Context words that only ever appear next to euphemistic usages.
pub const EUPHEMISTIC_CUES: [&str; 5] = ["gently", "discreetly", "politely", "softly", "tactfully"];
/// Context words that only ever appear next to literal usages.
pub const LITERAL_CUES: [&str; 5] = ["literally", "physically", "plainly", "concretely", "bluntly"];
const SUBJECTS: [&str; 6] = [
    "The neighbor",
    "My aunt",
    "The reporter",
    "Our manager",
    "A stranger",
    "The teacher",
];
const TAILS: [&str; 6] = [
    "during the long evening",
    "at the meeting yesterday",
    "before anyone noticed",
    "in front of the family",
    "after the announcement",
    "on the quiet street",
];

fn synthetic_term(i: usize) -> String {
    let mut digits = Vec::new();
    let mut n = i;
    loop {
        digits.push(SYLLABLES[n % SYLLABLES.len()]);
        n /= SYLLABLES.len();
        if n == 0 {
            break;
        }
    }
    while digits.len() < 2 {
        digits.push(SYLLABLES[0]);
    }
    digits.reverse();
    format!("{} {}ar", digits.concat(), SYLLABLES[(i * 5 + 1) % SYLLABLES.len()])
}

/// Generates a deterministic corpus in which every euphemistic sentence carries
/// one of [`EUPHEMISTIC_CUES`] and every literal one a [`LITERAL_CUES`] word.
/// Categories are assigned to PETs round-robin.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec) -> Result<Corpus> {
    let (lo, hi) = spec.sentences_per_pet;
    if spec.num_pets == 0 {
        return Err(CorpusError::BadSpec("num_pets must be at least 1".into()));
    }
    if lo == 0 || lo > hi {
        return Err(CorpusError::BadSpec(format!(
            "sentences_per_pet range ({lo}, {hi}) must satisfy 1 <= min <= max"
        )));
    }
    if spec.categories.is_empty() || spec.categories.iter().any(|c| c.trim().is_empty()) {
        return Err(CorpusError::BadSpec("categories must be non-empty names".into()));
    }
    for (name, p) in [
        ("label_noise", spec.label_noise),
        ("euphemistic_share", spec.euphemistic_share),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(CorpusError::BadSpec(format!("{name} must lie in [0, 1]")));
        }
    }

    let mut rng = rng::seeded(spec.seed);
    let markers = MarkerConfig::default();
    let mut records = Vec::new();
    for i in 0..spec.num_pets {
        let term = synthetic_term(i);
        let category = spec.categories[i % spec.categories.len()].clone();
        let base: u8 = rng.gen_bool(spec.euphemistic_share).into();
        let count = rng.gen_range(lo..=hi);
        let first = records.len();
        for _ in 0..count {
            let label = if rng.gen_bool(spec.label_noise) { 1 - base } else { base };
            let cues = if label == 1 { &EUPHEMISTIC_CUES } else { &LITERAL_CUES };
            let sentence = format!(
                "{} {} [{}] {}.",
                SUBJECTS.choose(&mut rng).unwrap(),
                cues.choose(&mut rng).unwrap(),
                term,
                TAILS.choose(&mut rng).unwrap()
            );
            records.push(PetRecord {
                record_id: records.len(),
                sentence,
                pet_term: term.clone(),
                label,
                category: category.clone(),
                status: PetStatus::Unknown,
                markers,
            });
        }
        let all_one = records[first..].iter().all(|r| r.label == 1);
        let status = if all_one {
            PetStatus::AlwaysEuph
        } else {
            PetStatus::SometimesEuph
        };
        for r in &mut records[first..] {
            r.status = status;
        }
    }
    Corpus::from_records(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<Corpus> {
        load_corpus(text.as_bytes(), &MarkerConfig::default())
    }

    #[test]
    fn loads_a_single_row() {
        let c = load("sentence,label,category,status\n\"My uncle [passed away] last night.\",1,death,always euph\n")
            .unwrap();
        let r = &c.records()[0];
        assert_eq!(r.pet_term, "passed away");
        assert_eq!(r.label, 1);
        assert_eq!(r.category, "death");
        assert_eq!(r.status, PetStatus::AlwaysEuph);
        assert_eq!(r.plain_sentence(), "My uncle passed away last night.");
    }

    #[test]
    fn tab_delimited_and_missing_status() {
        let c = load("sentence\tlabel\tcategory\nHe was [Let  Go] today.\t0\temployment\n").unwrap();
        assert_eq!(c.records()[0].pet_term, "let go");
        assert_eq!(c.records()[0].status, PetStatus::Unknown);
    }

    #[test]
    fn rejects_marker_problems() {
        let err = load("sentence,label,category\nNo markers here.,1,death\n").unwrap_err();
        assert!(matches!(err, CorpusError::MarkerCountError { row: 1, found: 0 }));
        let err = load("sentence,label,category\nok [a] ok,1,d\n[b] and [c],0,d\n").unwrap_err();
        assert!(matches!(err, CorpusError::MarkerCountError { row: 2, found: 2 }));
        let err = load("sentence,label,category\nreversed ]a[ here,1,d\n").unwrap_err();
        assert!(matches!(err, CorpusError::MarkerCountError { row: 1, .. }));
        let err = load("sentence,label,category\nempty [  ] span,1,d\n").unwrap_err();
        assert!(matches!(err, CorpusError::EmptyPetSpan { row: 1 }));
    }

    #[test]
    fn rejects_bad_label_and_empty_sentence() {
        let err = load("sentence,label,category\nx [a] y,2,d\n").unwrap_err();
        assert!(matches!(err, CorpusError::BadLabel { row: 1, ref value } if value == "2"));
        let err = load("sentence,label,category\n\"  \",1,d\n").unwrap_err();
        assert!(matches!(err, CorpusError::EmptySentence { row: 1 }));
    }

    #[test]
    fn missing_column_is_named() {
        let err = load("sentence,category\nx [a] y,d\n").unwrap_err();
        assert!(matches!(err, CorpusError::MissingColumn(ref c) if c == "label"));
    }

    #[test]
    fn rejects_non_utf8() {
        let bytes = b"sentence,label,category\n\xff[a],1,d\n";
        let err = load_corpus(&bytes[..], &MarkerConfig::default()).unwrap_err();
        assert!(matches!(err, CorpusError::Encoding(_)));
    }

    #[test]
    fn custom_markers() {
        let markers = MarkerConfig { open: '<', close: '>' };
        let c = load_corpus(
            "sentence,label,category\nHe [sic] was <let go>.,0,employment\n".as_bytes(),
            &markers,
        )
        .unwrap();
        assert_eq!(c.records()[0].pet_term, "let go");
        assert_eq!(c.records()[0].plain_sentence(), "He [sic] was let go.");
    }

    #[test]
    fn index_partitions_by_pet() {
        let c = load("sentence,label,category\n[a] x,1,d\n[a] y,0,d\n[b] z,1,e\n").unwrap();
        let idx = build_pet_index(&c);
        assert_eq!(idx.n(), 2);
        assert_eq!(idx.records_of("a"), &[0, 1]);
        assert_eq!(idx.records_of("b"), &[2]);
        assert_eq!(c.categories(), &["d".to_string(), "e".to_string()]);

        let empty = load("sentence,label,category\n").unwrap();
        assert_eq!(build_pet_index(&empty).n(), 0);
    }

    #[test]
    fn stats_average_and_empty() {
        let c = load("sentence,label,category\n[a] x,1,d\n[a] y,0,d\n[b] z,1,e\n").unwrap();
        let mk = |test: Vec<usize>| SplitResult::from_parts(Default::default(), vec![], vec![], test);
        let report = corpus_stats(&c, &[mk(vec![])]).unwrap();
        assert_eq!(report.avg_test_size, 0.0);
        assert_eq!(report.avg_unique_test_pets, 0.0);
        assert_eq!(report.pet_label_purity["a"], 0.5);

        let report = corpus_stats(&c, &[mk(vec![0]), mk(vec![0, 1, 2])]).unwrap();
        assert_eq!(report.avg_test_size, 2.0);
        assert_eq!(report.avg_unique_test_pets, 1.5);
        assert!(matches!(corpus_stats(&c, &[]), Err(CorpusError::EmptySplitList)));
    }

    #[test]
    fn synthetic_is_deterministic_and_noise_free() {
        let spec = SyntheticSpec {
            num_pets: 4,
            sentences_per_pet: (5, 5),
            seed: 7,
            ..Default::default()
        };
        let a = generate_synthetic_corpus(&spec).unwrap();
        let b = generate_synthetic_corpus(&spec).unwrap();
        let (mut ja, mut jb) = (Vec::new(), Vec::new());
        a.write_jsonl(&mut ja).unwrap();
        b.write_jsonl(&mut jb).unwrap();
        assert_eq!(ja, jb);
        assert_eq!(a.len(), 20);

        let idx = build_pet_index(&a);
        for ids in idx.entries.values() {
            let first = a.records()[ids[0]].label;
            assert!(ids.iter().all(|&id| a.records()[id].label == first));
        }
    }

    #[test]
    fn synthetic_reference_shape() {
        let c = generate_synthetic_corpus(&SyntheticSpec::default()).unwrap();
        assert_eq!(build_pet_index(&c).n(), 129);
        assert_eq!(c.categories().len(), 7);
        // 129 PETs averaging 15 sentences each
        assert!((1700..=2250).contains(&c.len()), "size {}", c.len());
    }

    #[test]
    fn synthetic_terms_unique() {
        let terms: BTreeSet<String> = (0..3000).map(synthetic_term).collect();
        assert_eq!(terms.len(), 3000);
    }

    #[test]
    fn bad_synthetic_spec() {
        let spec = SyntheticSpec {
            num_pets: 0,
            ..Default::default()
        };
        assert!(matches!(generate_synthetic_corpus(&spec), Err(CorpusError::BadSpec(_))));
        let spec = SyntheticSpec {
            sentences_per_pet: (3, 2),
            ..Default::default()
        };
        assert!(matches!(generate_synthetic_corpus(&spec), Err(CorpusError::BadSpec(_))));
    }
}
