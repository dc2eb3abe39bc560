//! Chat-model annotation harness: zero-/few-shot prompt construction,
//! a chat-completion client abstraction (HTTP, mock, scripted), robust
//! label parsing, an append-only response cache, and sequential batch
//! execution producing a prediction trace.
//!
//! Prompt builders are pure functions; byte-identical inputs yield
//! byte-identical prompts. Sentences are interpolated verbatim with no
//! quote escaping, which is a known injection hazard accepted for a
//! research tool.

use crate::bias::{PredictionTrace, TraceEntry};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("prompt batch is empty")]
    EmptyBatch,
    #[error("feature labels must be distinct and nonempty")]
    BadLabels,
    #[error("few-shot mode requires at least one example")]
    NoExamples,
    #[error("batch size must be at least 1")]
    BadBatchSize,
    #[error("temperature must be nonnegative, got {0}")]
    BadTemperature(f64),
    #[error("request failed after {attempts} attempts (completed batches are cached): {last}")]
    RetriesExhausted { attempts: usize, last: String },
    #[error("cache file {path} is corrupt at line {line}: {reason}")]
    CacheCorrupt {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("cache io error at {path}: {source}")]
    CacheIo {
        path: String,
        source: std::io::Error,
    },
    #[error("api key environment variable {0} is not set")]
    MissingApiKey(String),
}

/// Request configuration for a chat-completion endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: usize,
    pub timeout_secs: u64,
    pub max_retries: usize,
    /// First backoff delay; doubles per retry.
    pub backoff_base_ms: u64,
    pub batch_size: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: "https://api.example.invalid/v1/chat/completions".to_string(),
            model: "default".to_string(),
            temperature: 0.7,
            top_p: 0.9,
            max_tokens: 1024,
            timeout_secs: 60,
            max_retries: 3,
            backoff_base_ms: 500,
            batch_size: 100,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.batch_size == 0 {
            return Err(LlmError::BadBatchSize);
        }
        if self.temperature < 0.0 {
            return Err(LlmError::BadTemperature(self.temperature));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    ZeroShot,
    FewShot,
}

/// The two feature label strings and, for few-shot mode, the labeled
/// examples to prepend. Label A is the positive class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptSpec {
    pub label_a: String,
    pub label_b: String,
    pub mode: PromptMode,
    pub examples: Vec<(String, String)>,
}

impl PromptSpec {
    pub fn zero_shot(label_a: &str, label_b: &str) -> Self {
        PromptSpec {
            label_a: label_a.to_string(),
            label_b: label_b.to_string(),
            mode: PromptMode::ZeroShot,
            examples: Vec::new(),
        }
    }

    pub fn few_shot(label_a: &str, label_b: &str, examples: Vec<(String, String)>) -> Self {
        PromptSpec {
            label_a: label_a.to_string(),
            label_b: label_b.to_string(),
            mode: PromptMode::FewShot,
            examples,
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.label_a.is_empty() || self.label_b.is_empty() || self.label_a == self.label_b {
            return Err(LlmError::BadLabels);
        }
        if self.mode == PromptMode::FewShot && self.examples.is_empty() {
            return Err(LlmError::NoExamples);
        }
        Ok(())
    }
}

fn numbered_lines(batch: &[&str], spec: &PromptSpec, out: &mut String) {
    for (i, sentence) in batch.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}. Classify the sentence '{}' as '{}' or '{}' in one word while preserving the numbering at the start of the prompt.",
            i + 1,
            sentence,
            spec.label_a,
            spec.label_b
        );
    }
}

/// One numbered classification instruction per sentence.
pub fn build_zero_shot_prompt(batch: &[&str], spec: &PromptSpec) -> Result<String, LlmError> {
    spec.validate()?;
    if batch.is_empty() {
        return Err(LlmError::EmptyBatch);
    }
    let mut out = String::new();
    numbered_lines(batch, spec, &mut out);
    Ok(out)
}

pub const FEW_SHOT_PREAMBLE: &str = "I have given a few classified train examples";

/// Preamble, one `Sentence:`/`Label:` block per example, then the
/// numbered classification lines.
pub fn build_few_shot_prompt(batch: &[&str], spec: &PromptSpec) -> Result<String, LlmError> {
    spec.validate()?;
    if spec.examples.is_empty() {
        return Err(LlmError::NoExamples);
    }
    if batch.is_empty() {
        return Err(LlmError::EmptyBatch);
    }
    let mut out = String::new();
    let _ = writeln!(out, "{FEW_SHOT_PREAMBLE}");
    for (sentence, label) in &spec.examples {
        let _ = writeln!(out, "Sentence: {sentence}");
        let _ = writeln!(out, "Label: {label}");
    }
    out.push('\n');
    numbered_lines(batch, spec, &mut out);
    Ok(out)
}

pub fn build_prompt(batch: &[&str], spec: &PromptSpec) -> Result<String, LlmError> {
    match spec.mode {
        PromptMode::ZeroShot => build_zero_shot_prompt(batch, spec),
        PromptMode::FewShot => build_few_shot_prompt(batch, spec),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    /// Matched label text (one of the two spec labels).
    Parsed(String),
    Unparsed,
}

/// Case-insensitive substring keys for both labels, longest first, so
/// "non-habitual be" is tested before "habitual be" and the bare word
/// "habitual" still matches verbose responses.
fn match_keys(spec: &PromptSpec) -> Vec<(String, String)> {
    let mut keys = Vec::new();
    for label in [&spec.label_a, &spec.label_b] {
        keys.push((label.to_lowercase(), label.clone()));
        if let Some(first) = label.split_whitespace().next() {
            let first = first.to_lowercase();
            if keys.iter().all(|(k, _)| *k != first) {
                keys.push((first, label.clone()));
            }
        }
    }
    keys.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
    keys
}

fn match_label(text: &str, keys: &[(String, String)]) -> Option<String> {
    let lower = text.to_lowercase();
    keys.iter()
        .find(|(key, _)| lower.contains(key))
        .map(|(_, label)| label.clone())
}

/// Extract a label per expected index 1..=batch_size from a raw model
/// response. Numbered lines are matched to their index; for a batch of
/// one, an unnumbered response is matched whole. Failures are data
/// (`Unparsed`), never errors.
pub fn parse_response(raw: &str, batch_size: usize, spec: &PromptSpec) -> Vec<ParseStatus> {
    let keys = match_keys(spec);
    let mut by_index: HashMap<usize, &str> = HashMap::new();
    for line in raw.lines() {
        let trimmed = line.trim();
        let digits: String = trimmed.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            continue;
        }
        let rest = &trimmed[digits.len()..];
        if let Some(rest) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            if let Ok(n) = digits.parse::<usize>() {
                by_index.entry(n).or_insert(rest);
            }
        }
    }
    (1..=batch_size)
        .map(|i| {
            let text = match by_index.get(&i) {
                Some(rest) => rest,
                None if batch_size == 1 => raw,
                None => return ParseStatus::Unparsed,
            };
            match match_label(text, &keys) {
                Some(label) => ParseStatus::Parsed(label),
                None => ParseStatus::Unparsed,
            }
        })
        .collect()
}

/// Record of one submitted batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transcript {
    pub batch_id: usize,
    pub prompt: String,
    pub raw_response: String,
    pub parsed: Vec<ParseStatus>,
    pub from_cache: bool,
    pub retries: usize,
    pub timestamp: String,
}

/// One input item for a run: id, raw sentence text, gold label bit.
#[derive(Debug, Clone)]
pub struct LlmItem {
    pub id: String,
    pub text: String,
    pub gold: u8,
}

pub trait ChatClient {
    fn complete(&self, prompt: &str, config: &LlmConfig) -> Result<String, String>;
    /// Number of completions actually served (not from cache).
    fn calls(&self) -> usize;
}

/// Blocking HTTPS client speaking the common chat-completion shape
/// with bearer-token auth; the key is read from an environment
/// variable at construction.
pub struct HttpChatClient {
    api_key: String,
    calls: AtomicUsize,
}

impl HttpChatClient {
    pub fn from_env(var: &str) -> Result<Self, LlmError> {
        let api_key =
            std::env::var(var).map_err(|_| LlmError::MissingApiKey(var.to_string()))?;
        Ok(HttpChatClient {
            api_key,
            calls: AtomicUsize::new(0),
        })
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, prompt: &str, config: &LlmConfig) -> Result<String, String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let body = serde_json::json!({
            "model": config.model,
            "temperature": config.temperature,
            "top_p": config.top_p,
            "max_tokens": config.max_tokens,
            "messages": [{"role": "user", "content": prompt}],
        });
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| e.to_string())?;
        let response = client
            .post(&config.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| e.to_string())?;
        let status = response.status();
        if !status.is_success() {
            return Err(format!("http status {status}"));
        }
        let value: serde_json::Value = response.json().map_err(|e| e.to_string())?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| "response missing choices[0].message.content".to_string())
    }

    fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

/// Deterministic offline provider. It reads the sentences and label
/// strings back out of the prompt, labels each sentence with a cheap
/// heuristic keyed to the feature name, and flips roughly one in ten
/// answers by content hash so downstream metrics see realistic errors.
pub struct MockClient {
    pub seed: u64,
    calls: AtomicUsize,
}

impl MockClient {
    pub fn new(seed: u64) -> Self {
        MockClient {
            seed,
            calls: AtomicUsize::new(0),
        }
    }

    fn heuristic_label(&self, sentence: &str, label_a: &str, label_b: &str) -> String {
        let words: Vec<String> = sentence
            .split_whitespace()
            .map(|w| {
                w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                    .to_lowercase()
            })
            .collect();
        let positive = if label_a.to_lowercase().contains("negation") {
            let negative_words = words
                .iter()
                .filter(|w| {
                    matches!(
                        w.as_str(),
                        "not" | "no" | "never" | "nothing" | "nobody" | "none" | "nowhere"
                            | "neither" | "nor" | "ain't"
                    ) || w.ends_with("n't")
                })
                .count();
            negative_words >= 2
        } else {
            let be_at = words.iter().position(|w| w == "be");
            match be_at {
                Some(i) if i > 0 => matches!(
                    words[i - 1].as_str(),
                    "i" | "you" | "he" | "she" | "it" | "we" | "they"
                ),
                _ => false,
            }
        };
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(sentence.as_bytes());
        let flip = hasher.finalize()[0] < 26; // ~10% of the byte range
        if positive != flip {
            label_a.to_string()
        } else {
            label_b.to_string()
        }
    }
}

impl ChatClient for MockClient {
    fn complete(&self, prompt: &str, _config: &LlmConfig) -> Result<String, String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let mut out = String::new();
        for line in prompt.lines() {
            let trimmed = line.trim();
            let digits: String = trimmed.chars().take_while(|c| c.is_ascii_digit()).collect();
            if digits.is_empty() || !trimmed[digits.len()..].starts_with('.') {
                continue;
            }
            let rest = &trimmed[digits.len() + 1..];
            // line shape: Classify the sentence 'S' as 'A' or 'B' in one word ...
            let Some(s_start) = rest.find("the sentence '") else {
                continue;
            };
            let tail = &rest[s_start + "the sentence '".len()..];
            let Some(s_end) = tail.find("' as '") else {
                continue;
            };
            let sentence = &tail[..s_end];
            let labels = &tail[s_end + "' as '".len()..];
            let Some(a_end) = labels.find("' or '") else {
                continue;
            };
            let label_a = &labels[..a_end];
            let rest_b = &labels[a_end + "' or '".len()..];
            let Some(b_end) = rest_b.find('\'') else {
                continue;
            };
            let label_b = &rest_b[..b_end];
            let label = self.heuristic_label(sentence, label_a, label_b);
            let _ = writeln!(out, "{digits}. {label}");
        }
        Ok(out)
    }

    fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

/// Replays canned responses in order; used by tests.
pub struct ScriptClient {
    responses: Mutex<std::collections::VecDeque<String>>,
    calls: AtomicUsize,
}

impl ScriptClient {
    pub fn new(responses: Vec<String>) -> Self {
        ScriptClient {
            responses: Mutex::new(responses.into()),
            calls: AtomicUsize::new(0),
        }
    }
}

impl ChatClient for ScriptClient {
    fn complete(&self, _prompt: &str, _config: &LlmConfig) -> Result<String, String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.responses
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| "script exhausted".to_string())
    }

    fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    request: String,
    response: String,
    timestamp: String,
}

/// Append-only JSON-lines response cache keyed by a content hash of
/// (model, prompt). One writer, many readers; later entries for the
/// same key win on load, matching append semantics.
pub struct ResponseCache {
    path: PathBuf,
    entries: HashMap<String, String>,
}

pub fn cache_key(model: &str, prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(model.as_bytes());
    hasher.update([0u8]);
    hasher.update(prompt.as_bytes());
    format!("{:x}", hasher.finalize())
}

impl ResponseCache {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let file = std::fs::File::open(&path).map_err(|source| LlmError::CacheIo {
                path: path.display().to_string(),
                source,
            })?;
            for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|source| LlmError::CacheIo {
                    path: path.display().to_string(),
                    source,
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheEntry =
                    serde_json::from_str(&line).map_err(|e| LlmError::CacheCorrupt {
                        path: path.display().to_string(),
                        line: i + 1,
                        reason: e.to_string(),
                    })?;
                entries.insert(entry.key, entry.response);
            }
        }
        Ok(ResponseCache { path, entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn put(&mut self, key: &str, request: &str, response: &str) -> Result<(), LlmError> {
        let entry = CacheEntry {
            key: key.to_string(),
            request: request.to_string(),
            response: response.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        };
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|source| LlmError::CacheIo {
                path: self.path.display().to_string(),
                source,
            })?;
        writeln!(file, "{}", serde_json::to_string(&entry).expect("cache entry serializes"))
            .map_err(|source| LlmError::CacheIo {
                path: self.path.display().to_string(),
                source,
            })?;
        self.entries.insert(entry.key, entry.response);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub trace: PredictionTrace,
    pub transcripts: Vec<Transcript>,
    pub unparsed: usize,
    /// Completions served by the client (cache hits excluded).
    pub network_calls: usize,
}

/// Submit all batches strictly sequentially in dataset order. Every
/// response is appended to the cache when one is supplied; cached
/// prompts never reach the client, so a warm rerun makes zero calls.
/// Label A parses to predicted=1. Unparsed items are counted and left
/// out of the trace.
pub fn run_batches(
    items: &[LlmItem],
    spec: &PromptSpec,
    config: &LlmConfig,
    client: &dyn ChatClient,
    mut cache: Option<&mut ResponseCache>,
) -> Result<RunOutput, LlmError> {
    spec.validate()?;
    config.validate()?;
    if items.is_empty() {
        return Err(LlmError::EmptyBatch);
    }
    let calls_before = client.calls();
    let mut transcripts = Vec::new();
    let mut entries = Vec::new();
    let mut unparsed = 0;
    for (batch_id, batch) in items.chunks(config.batch_size).enumerate() {
        let texts: Vec<&str> = batch.iter().map(|item| item.text.as_str()).collect();
        let prompt = build_prompt(&texts, spec)?;
        let key = cache_key(&config.model, &prompt);
        let cached = cache.as_ref().and_then(|c| c.get(&key).map(str::to_string));
        let (raw, from_cache, retries) = match cached {
            Some(raw) => (raw, true, 0),
            None => {
                let (raw, retries) = complete_with_retry(client, &prompt, config)?;
                if let Some(cache) = cache.as_mut() {
                    cache.put(&key, &prompt, &raw)?;
                }
                (raw, false, retries)
            }
        };
        let parsed = parse_response(&raw, batch.len(), spec);
        for (offset, (item, status)) in batch.iter().zip(&parsed).enumerate() {
            match status {
                ParseStatus::Parsed(label) => entries.push(TraceEntry {
                    id: item.id.clone(),
                    predicted: u8::from(*label == spec.label_a),
                    gold: item.gold,
                    batch: batch_id,
                    position: batch_id * config.batch_size + offset,
                }),
                ParseStatus::Unparsed => unparsed += 1,
            }
        }
        transcripts.push(Transcript {
            batch_id,
            prompt,
            raw_response: raw,
            parsed,
            from_cache,
            retries,
            timestamp: chrono::Utc::now().to_rfc3339(),
        });
    }
    Ok(RunOutput {
        trace: PredictionTrace::new(entries).expect("positions constructed in order"),
        transcripts,
        unparsed,
        network_calls: client.calls() - calls_before,
    })
}

fn complete_with_retry(
    client: &dyn ChatClient,
    prompt: &str,
    config: &LlmConfig,
) -> Result<(String, usize), LlmError> {
    let mut last = String::new();
    for attempt in 0..=config.max_retries {
        match client.complete(prompt, config) {
            Ok(raw) => return Ok((raw, attempt)),
            Err(e) => {
                last = e;
                if attempt < config.max_retries {
                    let delay = config.backoff_base_ms.saturating_mul(1 << attempt);
                    std::thread::sleep(Duration::from_millis(delay));
                }
            }
        }
    }
    Err(LlmError::RetriesExhausted {
        attempts: config.max_retries + 1,
        last,
    })
}
