//! Line-delimited JSON protocol for out-of-process classifiers.
//!
//! The parent writes one `{"op":"train","rows":[...]}` line followed by one
//! `{"op":"predict","record_id":..,"sentence":..,"pet_term":..}` line per eval
//! row, then closes the child's stdin. The child answers every predict line
//! with `{"record_id":..,"label":0|1}` or `{"record_id":..,"raw":"..."}` and
//! exits once its input ends.
//!
//! [`serve`] implements the child side for any [`ChildModel`].

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{align_predictions, EvalRow, Prediction, PredictionRequest, Predictor, ProviderError, Result, TrainRow};
use crate::response_mapper::{map_response, MappedLabel, PhraseLists};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum ChildMessage {
    Train {
        rows: Vec<TrainRow>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        setting: Option<String>,
    },
    Predict {
        record_id: usize,
        sentence: String,
        pet_term: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildReply {
    pub record_id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubprocessConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    600
}

fn encode_request(request: &PredictionRequest) -> Vec<String> {
    let mut lines = Vec::with_capacity(request.eval.len() + 1);
    let train = ChildMessage::Train {
        rows: request.train.clone(),
        setting: Some(request.setting.clone()),
    };
    lines.push(serde_json::to_string(&train).expect("message serializes"));
    for EvalRow {
        record_id,
        sentence,
        pet_term,
    } in &request.eval
    {
        let msg = ChildMessage::Predict {
            record_id: *record_id,
            sentence: sentence.clone(),
            pet_term: pet_term.clone(),
        };
        lines.push(serde_json::to_string(&msg).expect("message serializes"));
    }
    lines
}

fn decode_reply(line: &str, line_no: usize, lists: &PhraseLists) -> Result<Prediction> {
    let protocol = |message: String| ProviderError::ProtocolError { line: line_no, message };
    let reply: ChildReply = serde_json::from_str(line).map_err(|e| protocol(e.to_string()))?;
    let label = match (reply.label, &reply.raw) {
        (Some(l @ (0 | 1)), _) => MappedLabel::direct(l),
        (Some(other), _) => return Err(protocol(format!("label {other} is not 0 or 1"))),
        (None, Some(raw)) => map_response(raw, lists),
        (None, None) => return Err(protocol("reply has neither `label` nor `raw`".into())),
    };
    Ok(Prediction {
        record_id: reply.record_id,
        raw: reply.raw,
        label,
    })
}

pub fn predict_via_subprocess(
    config: &SubprocessConfig,
    request: &PredictionRequest,
    lists: &PhraseLists,
) -> Result<Vec<Prediction>> {
    let (program, args) = config
        .command
        .split_first()
        .ok_or_else(|| ProviderError::ConfigError("subprocess command is empty".into()))?;
    let timeout = Duration::from_secs(config.timeout_secs);
    predict_with_timeout(program, args, request, lists, timeout)
}

pub(crate) fn predict_with_timeout(
    program: &str,
    args: &[String],
    request: &PredictionRequest,
    lists: &PhraseLists,
    timeout: Duration,
) -> Result<Vec<Prediction>> {
    let deadline = Instant::now() + timeout;
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|source| ProviderError::SpawnError {
            command: program.to_string(),
            source,
        })?;

    let mut stdin = child.stdin.take().expect("stdin piped");
    let lines = encode_request(request);
    let writer = thread::spawn(move || -> std::io::Result<()> {
        for line in lines {
            stdin.write_all(line.as_bytes())?;
            stdin.write_all(b"\n")?;
        }
        stdin.flush()
    });

    let stdout = child.stdout.take().expect("stdout piped");
    let (tx, rx) = mpsc::channel();
    let reader = thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            if tx.send(line).is_err() {
                break;
            }
        }
    });

    let mut predictions = Vec::new();
    let mut line_no = 0;
    let outcome: Result<()> = loop {
        let remaining = deadline.saturating_duration_since(Instant::now());
        match rx.recv_timeout(remaining) {
            Ok(Ok(line)) => {
                line_no += 1;
                if line.trim().is_empty() {
                    continue;
                }
                match decode_reply(&line, line_no, lists) {
                    Ok(p) => predictions.push(p),
                    Err(e) => break Err(e),
                }
            }
            Ok(Err(e)) => break Err(e.into()),
            Err(mpsc::RecvTimeoutError::Timeout) => break Err(ProviderError::Timeout(timeout)),
            Err(mpsc::RecvTimeoutError::Disconnected) => break Ok(()),
        }
    };
    if let Err(e) = outcome {
        // Grandchildren may still hold the pipes open; leave the I/O threads detached.
        let _ = child.kill();
        let _ = child.wait();
        return Err(e);
    }

    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Err(ProviderError::Timeout(timeout));
        }
        thread::sleep(Duration::from_millis(5));
    };
    let _ = reader.join();
    let write_result = writer.join().unwrap_or(Ok(()));
    if !status.success() {
        return Err(ProviderError::ProtocolError {
            line: line_no,
            message: format!("child exited with {status}"),
        });
    }
    if let Err(e) = write_result {
        return Err(ProviderError::ProtocolError {
            line: line_no,
            message: format!("child stopped reading its input: {e}"),
        });
    }
    align_predictions(&request.eval_ids(), predictions, ProviderError::IncompleteCoverage)
}

pub struct SubprocessPredictor {
    pub config: SubprocessConfig,
    pub lists: PhraseLists,
}

impl Predictor for SubprocessPredictor {
    fn name(&self) -> &str {
        "subprocess"
    }

    fn predict(&self, request: &PredictionRequest) -> Result<Vec<Prediction>> {
        predict_via_subprocess(&self.config, request, &self.lists)
    }
}

/// A model hosted behind [`serve`].
pub trait ChildModel {
    fn train(&mut self, rows: &[TrainRow]) -> Result<()>;
    fn predict(&self, row: &EvalRow) -> ChildReply;
}

/// Runs the child side of the protocol until `input` ends. Predict lines
/// before any train line are answered by an untrained model.
pub fn serve<R: BufRead, W: Write, M: ChildModel>(input: R, mut output: W, model: &mut M) -> Result<()> {
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let msg: ChildMessage = serde_json::from_str(&line).map_err(|e| ProviderError::ProtocolError {
            line: i + 1,
            message: e.to_string(),
        })?;
        match msg {
            ChildMessage::Train { rows, .. } => model.train(&rows)?,
            ChildMessage::Predict {
                record_id,
                sentence,
                pet_term,
            } => {
                let reply = model.predict(&EvalRow {
                    record_id,
                    sentence,
                    pet_term,
                });
                serde_json::to_writer(&mut output, &reply).expect("reply serializes");
                output.write_all(b"\n")?;
            }
        }
    }
    output.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::MarkerConfig;
    use crate::response_mapper::LabelValue;

    fn request(n: usize) -> PredictionRequest {
        PredictionRequest {
            train: vec![TrainRow {
                record_id: 100,
                sentence: "[a] x".into(),
                pet_term: "a".into(),
                label: 1,
            }],
            eval: (0..n)
                .map(|i| EvalRow {
                    record_id: i,
                    sentence: format!("[b] {i}"),
                    pet_term: "b".into(),
                })
                .collect(),
            setting: "standard".into(),
            markers: MarkerConfig::default(),
        }
    }

    fn sh(script: &str) -> SubprocessConfig {
        SubprocessConfig {
            command: vec!["sh".into(), "-c".into(), script.into()],
            timeout_secs: 10,
        }
    }

    #[test]
    fn request_encoding() {
        let lines = encode_request(&request(2));
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("{\"op\":\"train\",\"rows\":[{\"record_id\":100"));
        assert_eq!(
            lines[1],
            "{\"op\":\"predict\",\"record_id\":0,\"sentence\":\"[b] 0\",\"pet_term\":\"b\"}"
        );
    }

    #[test]
    fn shell_child_labels_everything_one() {
        // Skip the train line, then answer each predict line by echoing its record id.
        let script = r#"read train; while read line; do id=$(echo "$line" | sed 's/.*"record_id":\([0-9]*\).*/\1/'); echo "{\"record_id\":$id,\"label\":1}"; done"#;
        let preds = predict_via_subprocess(&sh(script), &request(4), &PhraseLists::default()).unwrap();
        assert_eq!(preds.len(), 4);
        assert!(preds.iter().all(|p| p.label.value == LabelValue::One));
    }

    #[test]
    fn raw_replies_are_mapped() {
        let script = r#"read train; read p; echo '{"record_id":0,"raw":"It is not a euphemism."}'"#;
        let preds = predict_via_subprocess(&sh(script), &request(1), &PhraseLists::default()).unwrap();
        assert_eq!(preds[0].label.value, LabelValue::Zero);
    }

    #[test]
    fn malformed_line_names_line_number() {
        let script = r#"read train; echo '{"record_id":0,"label":1}'; echo 'garbage'"#;
        let err = predict_via_subprocess(&sh(script), &request(2), &PhraseLists::default()).unwrap_err();
        assert!(matches!(err, ProviderError::ProtocolError { line: 2, .. }), "{err}");
    }

    #[test]
    fn missing_replies() {
        let script = r#"cat > /dev/null; echo '{"record_id":0,"label":1}'"#;
        let err = predict_via_subprocess(&sh(script), &request(3), &PhraseLists::default()).unwrap_err();
        assert!(matches!(err, ProviderError::IncompleteCoverage(ids) if ids == vec![1, 2]));
    }

    #[test]
    fn nonzero_exit_and_spawn_failure() {
        let err =
            predict_via_subprocess(&sh("cat > /dev/null; exit 3"), &request(1), &PhraseLists::default()).unwrap_err();
        assert!(matches!(err, ProviderError::ProtocolError { .. }));
        let cfg = SubprocessConfig {
            command: vec!["/definitely/not/here".into()],
            timeout_secs: 1,
        };
        assert!(matches!(
            predict_via_subprocess(&cfg, &request(1), &PhraseLists::default()),
            Err(ProviderError::SpawnError { .. })
        ));
    }

    #[test]
    fn timeout_kills_child() {
        let err = predict_with_timeout(
            "sh",
            &["-c".into(), "sleep 5".into()],
            &request(1),
            &PhraseLists::default(),
            Duration::from_millis(200),
        )
        .unwrap_err();
        assert!(matches!(err, ProviderError::Timeout(_)));
    }

    struct Constant;

    impl ChildModel for Constant {
        fn train(&mut self, _rows: &[TrainRow]) -> Result<()> {
            Ok(())
        }

        fn predict(&self, row: &EvalRow) -> ChildReply {
            ChildReply {
                record_id: row.record_id,
                label: Some(0),
                raw: None,
            }
        }
    }

    #[test]
    fn serve_round_trip() {
        let input = encode_request(&request(2)).join("\n");
        let mut out = Vec::new();
        serve(input.as_bytes(), &mut out, &mut Constant).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "{\"record_id\":0,\"label\":0}\n{\"record_id\":1,\"label\":0}\n");
    }
}
