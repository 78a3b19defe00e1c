use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use petbench::corpus::{self, Corpus, SyntheticSpec};
use petbench::providers::baseline::{BaselineChild, BaselineConfig};
use petbench::providers::subprocess;
use petbench::response_mapper::{map_response, MappedLabel, PhraseLists, EXCLUSION_WARNING_THRESHOLD};
use petbench::runner::{self, ExperimentConfig, RunError};
use petbench::splitter::{self, Setting, SplitConfig, SplitResult};
use petbench::tables::{self, Table};

#[derive(Parser)]
#[command(name = "petbench", version, about = "Euphemism detection benchmark harness")]
struct Cli {
    /// Experiment config (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override; for `run` this is the root replication seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CorpusArg {
    /// Corpus file (.tsv, .csv or .jsonl). Defaults to the config's corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build one split, verify it and write it as JSON.
    Split {
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long, default_value = "standard")]
        setting: Setting,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long)]
        category: Option<String>,
        #[arg(long, default_value_t = 0.30)]
        pool_fraction: f64,
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
    /// Average test statistics for every split regime over several seeds.
    Stats {
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a configured experiment end to end.
    Run,
    /// Score a prediction file against the test part of a split.
    Score {
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        preds: PathBuf,
        #[arg(long)]
        phrases: Option<PathBuf>,
    },
    /// Map raw responses from stdin to labels (one JSON line each).
    MapResponses {
        #[arg(long)]
        phrases: Option<PathBuf>,
    },
    /// Print a results grid from one or more experiment reports.
    Table {
        reports: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Write a synthetic corpus as JSON lines.
    Synth {
        #[arg(long, default_value_t = 129)]
        pets: usize,
        #[arg(long, default_value_t = 0.0)]
        label_noise: f64,
    },
    /// Serve the baseline model over the subprocess protocol on stdin/stdout.
    #[command(hide = true)]
    ServeBaseline,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Tsv,
    Csv,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl ToString) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn provider(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::validation(e)
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: Cli) -> CliResult {
    let config = cli.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let seed = cli.seed;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Split {
            corpus,
            setting,
            k,
            category,
            pool_fraction,
            tolerance,
        } => {
            let corpus = load(&corpus, config.as_ref())?;
            let split_config = SplitConfig {
                setting,
                k,
                holdout_category: category,
                pool_fraction,
                tolerance,
                seed: seed.unwrap_or(0),
            };
            cmd_split(&corpus, &split_config, out)
        }
        Command::Stats {
            corpus,
            samples,
            format,
        } => {
            let corpus = load(&corpus, config.as_ref())?;
            let settings = runner::statistics_settings(&corpus);
            let stats =
                runner::collect_stats(&corpus, &settings, samples, seed.unwrap_or(0)).map_err(Failure::validation)?;
            let table = tables::stats_table(&runner::stats_rows(&stats)).map_err(Failure::validation)?;
            emit(&table, format, out)
        }
        Command::Run => {
            let mut config = config.ok_or_else(|| Failure::validation("`run` needs --config"))?;
            if let Some(seed) = seed {
                config.split.seed = seed;
            }
            if let Some(out) = out {
                config.output_dir = out.to_path_buf();
            }
            let report = runner::run_experiment(&config)?;
            let m = &report.aggregate.macro_avg;
            println!(
                "{} / {} over {} replications: macro P {:.3} R {:.3} F1 {:.3} (F1 std {:.3})",
                report.setting,
                report.provider,
                report.aggregate.n_replications,
                m.precision.mean,
                m.recall.mean,
                m.f1.mean,
                m.f1.std
            );
            println!("report: {}", config.output_dir.join("report.json").display());
            Ok(())
        }
        Command::Score {
            corpus,
            split,
            preds,
            phrases,
        } => {
            let corpus = load(&corpus, config.as_ref())?;
            let split = SplitResult::read_json(&split).map_err(Failure::validation)?;
            let lists = phrase_lists(phrases.as_deref())?;
            let report = runner::score_file(&corpus, &split, &preds, &lists)?;
            write_output(&pretty(&report), out)
        }
        Command::MapResponses { phrases } => cmd_map(&phrase_lists(phrases.as_deref())?, out),
        Command::Table { reports, format } => {
            let cells = reports
                .iter()
                .map(|p| {
                    let text = fs::read_to_string(p)?;
                    serde_json::from_str::<runner::ExperimentReport>(&text)
                        .map(|r| r.result_cell())
                        .map_err(|e| Failure::validation(format!("{}: {e}", p.display())))
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let table = tables::results_table(&cells).map_err(Failure::validation)?;
            emit(&table, format, out)
        }
        Command::Synth { pets, label_noise } => {
            let spec = SyntheticSpec {
                num_pets: pets,
                label_noise,
                seed: seed.unwrap_or(0),
                ..Default::default()
            };
            let corpus = corpus::generate_synthetic_corpus(&spec).map_err(Failure::validation)?;
            let mut buf = Vec::new();
            corpus.write_jsonl(&mut buf).map_err(Failure::validation)?;
            write_output(&String::from_utf8_lossy(&buf), out)
        }
        Command::ServeBaseline => {
            let mut model = BaselineChild::new(BaselineConfig {
                seed: seed.unwrap_or(0),
                ..Default::default()
            });
            let stdin = io::stdin();
            subprocess::serve(stdin.lock(), io::stdout().lock(), &mut model).map_err(Failure::provider)
        }
    }
}

fn load(arg: &CorpusArg, config: Option<&ExperimentConfig>) -> Result<Corpus, Failure> {
    let (path, markers) = match (&arg.corpus, config) {
        (Some(p), cfg) => (p.clone(), cfg.map(|c| c.markers).unwrap_or_default()),
        (None, Some(cfg)) => (cfg.corpus.clone(), cfg.markers),
        (None, None) => return Err(Failure::validation("no corpus given (use --corpus or --config)")),
    };
    corpus::load_corpus_path(&path, &markers).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

fn phrase_lists(path: Option<&Path>) -> Result<PhraseLists, Failure> {
    path.map_or_else(
        || Ok(PhraseLists::default()),
        |p| PhraseLists::load(p).map_err(Failure::validation),
    )
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn write_output(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit(table: &Table, format: Format, out: Option<&Path>) -> CliResult {
    let text = match format {
        Format::Text => table.to_text(),
        Format::Tsv => table.to_delimited(b'\t'),
        Format::Csv => table.to_delimited(b','),
    };
    write_output(&text, out)
}

fn cmd_split(corpus: &Corpus, config: &SplitConfig, out: Option<&Path>) -> CliResult {
    let split = splitter::split(corpus, config).map_err(Failure::validation)?;
    let report = splitter::verify_split(corpus, &split);
    let s = &split.realized_sizes;
    eprintln!(
        "{}: train {} / validation {} / test {}",
        config.label(),
        s.train,
        s.validation,
        s.test
    );
    for failure in report.failures() {
        eprintln!("check failed: {failure:?}");
    }
    match out {
        Some(path) => split.write_json(path).map_err(Failure::validation)?,
        None => println!("{}", split.to_json()),
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::validation("split failed verification"))
    }
}

#[derive(Serialize)]
struct MappedLine {
    #[serde(skip_serializing_if = "Option::is_none")]
    record_id: Option<serde_json::Value>,
    raw: String,
    label: Option<u8>,
    #[serde(flatten)]
    mapped: MappedLabel,
}

/// Each stdin line is either plain text or a JSON object with a `raw` field
/// (and optionally `record_id`, echoed back).
fn cmd_map(lists: &PhraseLists, out: Option<&Path>) -> CliResult {
    let mut text = String::new();
    let mut total = 0usize;
    let mut unmapped = 0usize;
    for line in io::stdin().lock().lines() {
        let line = line?;
        let (record_id, raw) = match serde_json::from_str::<serde_json::Value>(&line) {
            Ok(serde_json::Value::Object(obj)) => {
                let raw = obj
                    .get("raw")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| Failure::validation(format!("line {}: object without string `raw`", total + 1)))?;
                (obj.get("record_id").cloned(), raw.to_string())
            }
            _ => (None, line),
        };
        let mapped = map_response(&raw, lists);
        total += 1;
        if mapped.value.as_binary().is_none() {
            unmapped += 1;
        }
        let entry = MappedLine {
            record_id,
            raw,
            label: mapped.value.as_binary(),
            mapped,
        };
        text.push_str(&serde_json::to_string(&entry).expect("serializable"));
        text.push('\n');
    }
    write_output(&text, out)?;
    let rate = if total == 0 {
        0.0
    } else {
        unmapped as f64 / total as f64
    };
    eprintln!("exclusion rate: {rate:.4} ({unmapped}/{total})");
    if rate > EXCLUSION_WARNING_THRESHOLD {
        eprintln!(
            "warning: exclusion rate above {:.0}%",
            EXCLUSION_WARNING_THRESHOLD * 100.0
        );
    }
    Ok(())
}
