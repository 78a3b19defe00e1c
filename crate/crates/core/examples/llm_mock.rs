//! Query a completions endpoint with few-shot prompts, with retries and a
//! response cache. A local stub server stands in for the real API: it
//! rejects the first request with 429 and then answers from cue words.
//!
//! Run with `cargo run --example llm_mock`.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use petbench::corpus::{generate_synthetic_corpus, SyntheticSpec, EUPHEMISTIC_CUES};
use petbench::metrics::score;
use petbench::prompting::PromptTemplate;
use petbench::providers::llm::{predict_via_llm, LlmConfig};
use petbench::providers::{render_prompts, DemoPlan, PredictionRequest};
use petbench::response_mapper::PhraseLists;
use petbench::splitter::{split, SplitConfig};

static SEEN: AtomicUsize = AtomicUsize::new(0);

fn answer(prompt: &str) -> &'static str {
    // only the last line is the query
    let query = prompt.lines().last().unwrap_or_default();
    if EUPHEMISTIC_CUES.iter().any(|c| query.contains(c)) {
        "Yes"
    } else if query.len().is_multiple_of(7) {
        "Hmm, hard to say."
    } else {
        " No, it is meant literally."
    }
}

fn stub_server() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/completions", listener.local_addr().unwrap());
    thread::spawn(move || {
        for mut stream in listener.incoming().flatten() {
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap_or(0) > 0 && line != "\r\n" {
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap_or(0);
                }
                line.clear();
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            let request: serde_json::Value = serde_json::from_slice(&body).unwrap();
            let (status, payload) = if SEEN.fetch_add(1, Ordering::SeqCst) == 0 {
                (429, "{}".to_string())
            } else {
                let text = answer(request["prompt"].as_str().unwrap_or_default());
                (200, serde_json::json!({ "choices": [{ "text": text }] }).to_string())
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    url
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec {
        num_pets: 40,
        ..Default::default()
    })?;
    let s = split(&corpus, &SplitConfig::kshot(1, 0))?;
    let request = PredictionRequest::from_split(&corpus, &s);
    let prompts = render_prompts(
        &request,
        &PromptTemplate::default_template(),
        &DemoPlan::SamePetOrRandom { count: 1, seed: 0 },
    )?;
    println!("example prompt:\n{}\n", prompts[0].1);

    let cache = tempfile::tempdir()?;
    let config = LlmConfig {
        backoff_base_ms: 50,
        cache_dir: Some(cache.path().to_path_buf()),
        ..LlmConfig::new(stub_server(), "stub-model")
    };
    let lists = PhraseLists::default();
    for pass in ["cold", "warm"] {
        let outcome = predict_via_llm(&config, &prompts, &lists)?;
        let gold: Vec<u8> = s.test.iter().map(|&id| corpus.records()[id].label).collect();
        let pred: Vec<_> = outcome.predictions.iter().map(|p| p.label.value).collect();
        let report = score(&gold, &pred)?;
        println!(
            "{pass} cache: {} requests, {} retries, {} cache hits; macro F1 {:.3}, exclusion rate {:.3}",
            outcome.stats.requests_sent,
            outcome.stats.retries,
            outcome.stats.cache_hits,
            report.macro_avg.f1,
            report.exclusion_rate
        );
    }
    Ok(())
}
