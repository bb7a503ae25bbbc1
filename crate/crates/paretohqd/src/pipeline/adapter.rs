//! External scorer/generator/trainer adapters and their wire protocol.
//!
//! Two transports speak the same JSON bodies:
//!
//! * subprocess mode — the adapter reads line-delimited requests on stdin
//!   and writes one response line per request on stdout;
//! * HTTP mode — POST /score, /generate, /train with the requests batched
//!   as arrays.
//!
//! Scorer: `{"id":...,"prompt":...,"response":...}` ->
//! `{"id":...,"rewards":[...]}`. Generator: `{"id":...,"prompt":...}` ->
//! `{"id":...,"response":...}`. Trainer:
//! `{"preference":[...],"train_file":...,"stage":1|2,"hyperparameters":{...}}`
//! -> `{"status":"ok"|"error",...}`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub id: String,
    pub prompt: String,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub id: String,
    pub rewards: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub id: String,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub id: String,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRequest {
    pub preference: Vec<f64>,
    pub train_file: String,
    pub stage: u8,
    pub hyperparameters: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResponse {
    pub status: String,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

pub trait ScorerAdapter {
    fn score_batch(&mut self, batch: &[ScoreRequest]) -> Result<Vec<ScoreResponse>>;
    fn name(&self) -> &str;
}

pub trait GeneratorAdapter {
    fn generate_batch(&mut self, batch: &[GenerateRequest]) -> Result<Vec<GenerateResponse>>;
    fn name(&self) -> &str;
}

pub trait TrainerAdapter {
    fn train(&mut self, request: &TrainRequest) -> Result<TrainResponse>;
    fn name(&self) -> &str;
}

/// Transport options shared by all adapter kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterOptions {
    pub timeout_secs: u64,
    pub batch_size: usize,
    pub retries: usize,
}

impl Default for AdapterOptions {
    fn default() -> Self {
        Self {
            timeout_secs: 60,
            batch_size: 64,
            retries: 3,
        }
    }
}

// ---------------------------------------------------------------------------
// Subprocess transport
// ---------------------------------------------------------------------------

/// Long-lived worker speaking line-delimited JSON over stdin/stdout. The
/// child is (re)spawned lazily, so a crashed worker is replaced on the next
/// batch attempt.
pub struct SubprocessWorker {
    command_line: String,
    timeout: Duration,
    child: Option<ChildHandle>,
}

struct ChildHandle {
    child: Child,
    stdin: std::process::ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl SubprocessWorker {
    pub fn new(command_line: &str, timeout: Duration) -> Self {
        Self {
            command_line: command_line.to_string(),
            timeout,
            child: None,
        }
    }

    pub fn command_line(&self) -> &str {
        &self.command_line
    }

    fn spawn(&mut self) -> Result<()> {
        let parts: Vec<&str> = self.command_line.split_whitespace().collect();
        let (program, args) = parts
            .split_first()
            .ok_or_else(|| Error::Adapter("empty subprocess command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Adapter(format!("spawn {program:?}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        self.child = Some(ChildHandle {
            child,
            stdin,
            lines: rx,
        });
        Ok(())
    }

    fn ensure_alive(&mut self) -> Result<()> {
        let dead = match &mut self.child {
            None => true,
            Some(handle) => handle.child.try_wait().map(|s| s.is_some()).unwrap_or(true),
        };
        if dead {
            self.drop_child();
            self.spawn()?;
        }
        Ok(())
    }

    fn drop_child(&mut self) {
        if let Some(mut handle) = self.child.take() {
            let _ = handle.child.kill();
            let _ = handle.child.wait();
        }
    }

    /// Sends one line per request and reads exactly one line back per
    /// request. Any transport failure kills the child so the next attempt
    /// starts fresh.
    pub fn round_trip(&mut self, request_lines: &[String]) -> Result<Vec<String>> {
        self.ensure_alive()?;
        let handle = self.child.as_mut().expect("spawned above");

        let mut payload = String::new();
        for line in request_lines {
            payload.push_str(line);
            payload.push('\n');
        }
        if let Err(e) = handle.stdin.write_all(payload.as_bytes()).and_then(|_| handle.stdin.flush()) {
            self.drop_child();
            return Err(Error::Adapter(format!("write to worker: {e}")));
        }

        let mut responses = Vec::with_capacity(request_lines.len());
        for _ in 0..request_lines.len() {
            match handle.lines.recv_timeout(self.timeout) {
                Ok(Ok(line)) => responses.push(line),
                Ok(Err(e)) => {
                    self.drop_child();
                    return Err(Error::Adapter(format!("read from worker: {e}")));
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.drop_child();
                    return Err(Error::Adapter("worker response timed out".into()));
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.drop_child();
                    return Err(Error::Adapter("worker exited mid-batch".into()));
                }
            }
        }
        Ok(responses)
    }
}

impl Drop for SubprocessWorker {
    fn drop(&mut self) {
        self.drop_child();
    }
}

pub struct SubprocessScorer {
    worker: SubprocessWorker,
    label: String,
}

impl SubprocessScorer {
    pub fn new(command_line: &str, timeout: Duration) -> Self {
        Self {
            worker: SubprocessWorker::new(command_line, timeout),
            label: format!("subprocess:{command_line}"),
        }
    }
}

impl ScorerAdapter for SubprocessScorer {
    fn score_batch(&mut self, batch: &[ScoreRequest]) -> Result<Vec<ScoreResponse>> {
        let lines: Vec<String> = batch
            .iter()
            .map(|r| serde_json::to_string(r).map_err(Error::from))
            .collect::<Result<_>>()?;
        let replies = self.worker.round_trip(&lines)?;
        replies
            .iter()
            .map(|line| {
                serde_json::from_str(line)
                    .map_err(|e| Error::Adapter(format!("bad scorer reply {line:?}: {e}")))
            })
            .collect()
    }

    fn name(&self) -> &str {
        &self.label
    }
}

pub struct SubprocessGenerator {
    worker: SubprocessWorker,
    label: String,
}

impl SubprocessGenerator {
    pub fn new(command_line: &str, timeout: Duration) -> Self {
        Self {
            worker: SubprocessWorker::new(command_line, timeout),
            label: format!("subprocess:{command_line}"),
        }
    }
}

impl GeneratorAdapter for SubprocessGenerator {
    fn generate_batch(&mut self, batch: &[GenerateRequest]) -> Result<Vec<GenerateResponse>> {
        let lines: Vec<String> = batch
            .iter()
            .map(|r| serde_json::to_string(r).map_err(Error::from))
            .collect::<Result<_>>()?;
        let replies = self.worker.round_trip(&lines)?;
        replies
            .iter()
            .map(|line| {
                serde_json::from_str(line)
                    .map_err(|e| Error::Adapter(format!("bad generator reply {line:?}: {e}")))
            })
            .collect()
    }

    fn name(&self) -> &str {
        &self.label
    }
}

pub struct SubprocessTrainer {
    worker: SubprocessWorker,
    label: String,
}

impl SubprocessTrainer {
    pub fn new(command_line: &str, timeout: Duration) -> Self {
        Self {
            worker: SubprocessWorker::new(command_line, timeout),
            label: format!("subprocess:{command_line}"),
        }
    }
}

impl TrainerAdapter for SubprocessTrainer {
    fn train(&mut self, request: &TrainRequest) -> Result<TrainResponse> {
        let line = serde_json::to_string(request)?;
        let replies = self.worker.round_trip(&[line])?;
        serde_json::from_str(&replies[0])
            .map_err(|e| Error::Adapter(format!("bad trainer reply {:?}: {e}", replies[0])))
    }

    fn name(&self) -> &str {
        &self.label
    }
}

// ---------------------------------------------------------------------------
// HTTP transport
// ---------------------------------------------------------------------------

/// Adapter speaking the batched-array protocol over HTTP.
pub struct HttpAdapter {
    base_url: String,
    client: reqwest::blocking::Client,
}

impl HttpAdapter {
    pub fn new(base_url: &str, timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Adapter(format!("http client: {e}")))?;
        Ok(Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            client,
        })
    }

    fn post<Req: Serialize, Resp: for<'de> Deserialize<'de>>(
        &self,
        path: &str,
        body: &Req,
    ) -> Result<Resp> {
        let url = format!("{}{path}", self.base_url);
        let response = self
            .client
            .post(&url)
            .json(body)
            .send()
            .map_err(|e| Error::Adapter(format!("POST {url}: {e}")))?;
        if !response.status().is_success() {
            return Err(Error::Adapter(format!(
                "POST {url}: status {}",
                response.status()
            )));
        }
        response
            .json()
            .map_err(|e| Error::Adapter(format!("POST {url}: bad body: {e}")))
    }
}

impl ScorerAdapter for HttpAdapter {
    fn score_batch(&mut self, batch: &[ScoreRequest]) -> Result<Vec<ScoreResponse>> {
        self.post("/score", &batch)
    }

    fn name(&self) -> &str {
        &self.base_url
    }
}

impl GeneratorAdapter for HttpAdapter {
    fn generate_batch(&mut self, batch: &[GenerateRequest]) -> Result<Vec<GenerateResponse>> {
        self.post("/generate", &batch)
    }

    fn name(&self) -> &str {
        &self.base_url
    }
}

impl TrainerAdapter for HttpAdapter {
    fn train(&mut self, request: &TrainRequest) -> Result<TrainResponse> {
        let responses: Vec<TrainResponse> = self.post("/train", &vec![request])?;
        responses
            .into_iter()
            .next()
            .ok_or_else(|| Error::Adapter("empty /train response".into()))
    }

    fn name(&self) -> &str {
        &self.base_url
    }
}

// ---------------------------------------------------------------------------
// Built-in adapters
// ---------------------------------------------------------------------------

/// Pure-function scorer: rewards are derived from a hash of the prompt and
/// response, mapped into [0, 1]. Useful for smoke tests and protocol
/// conformance checks.
pub struct HashScorer {
    arity: usize,
}

impl HashScorer {
    pub fn new(arity: usize) -> Self {
        Self { arity }
    }
}

/// The deterministic reward vector the hash scorer assigns.
pub fn hash_rewards(prompt: &str, response: &str, arity: usize) -> Vec<f64> {
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    hasher.update([0u8]);
    hasher.update(response.as_bytes());
    let digest = hasher.finalize();
    (0..arity)
        .map(|i| {
            let start = (i * 8) % (digest.len() - 8);
            let raw = u64::from_le_bytes(digest[start..start + 8].try_into().expect("8 bytes"));
            (raw >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

impl ScorerAdapter for HashScorer {
    fn score_batch(&mut self, batch: &[ScoreRequest]) -> Result<Vec<ScoreResponse>> {
        Ok(batch
            .iter()
            .map(|r| ScoreResponse {
                id: r.id.clone(),
                rewards: hash_rewards(&r.prompt, &r.response, self.arity),
            })
            .collect())
    }

    fn name(&self) -> &str {
        "builtin:hash"
    }
}

/// Trainer that records requests and reports success; stands in when no
/// external trainer is configured but invocation counts matter.
#[derive(Default)]
pub struct NullTrainer {
    pub calls: Vec<TrainRequest>,
}

impl TrainerAdapter for NullTrainer {
    fn train(&mut self, request: &TrainRequest) -> Result<TrainResponse> {
        self.calls.push(request.clone());
        Ok(TrainResponse {
            status: "ok".into(),
            extra: serde_json::Map::new(),
        })
    }

    fn name(&self) -> &str {
        "builtin:null"
    }
}
