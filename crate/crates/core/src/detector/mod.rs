//! Detection backends behind one interface.
//!
//! Every backend turns a source file and a prompt into raw response text;
//! [`detect`] parses that text, drops out-of-range lines and merges
//! duplicates, so all backends are scored the same way.

pub mod baseline;
pub mod llm;
pub mod replay;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::LogicTreePrompt;
use crate::source::SourceUnit;

pub use baseline::{baseline_detect, BaselineDetector};
pub use llm::{ChatTransport, LlmDetector, ReqwestTransport};
pub use replay::{ReplayDetector, ReplayFixture, ReplayResponse};
pub use report::{merge_reports, parse_output, render_reports, DefectReport, ParsedOutput, NO_DEFECTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Llm,
    Baseline,
    Replay,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "llm" => Ok(Backend::Llm),
            "baseline" => Ok(Backend::Baseline),
            "replay" => Ok(Backend::Replay),
            other => Err(format!("unknown backend `{other}` (llm, baseline, replay)")),
        }
    }
}

/// Models that reject a `temperature` field.
pub fn temperature_supported(model_id: &str) -> bool {
    !model_id.starts_with("o1")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub backend: Backend,
    pub model_id: String,
    pub temperature: f64,
    /// Chat-completion base URL; `LINTLLM_API_BASE` when absent.
    pub endpoint: Option<String>,
    pub max_parallel: usize,
    pub timeout_secs: u64,
    pub retry_budget: u32,
    /// First retry delay; doubles on each further attempt.
    pub backoff_ms: u64,
    /// Replay fixture file.
    pub fixture: Option<PathBuf>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Baseline,
            model_id: "gpt-4o".to_string(),
            temperature: 0.0,
            endpoint: None,
            max_parallel: 4,
            timeout_secs: 120,
            retry_budget: 3,
            backoff_ms: 500,
            fixture: None,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectError> {
        if self.max_parallel == 0 {
            return Err(DetectError::Config("max_parallel must be at least 1".into()));
        }
        if self.backend == Backend::Llm && self.temperature != 0.0 && temperature_supported(&self.model_id) {
            return Err(DetectError::Config(format!(
                "temperature must be 0 for model {}",
                self.model_id
            )));
        }
        if self.backend == Backend::Replay && self.fixture.is_none() {
            return Err(DetectError::Config("replay backend needs a fixture file".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawResponse {
    pub text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub dut_id: String,
    pub reports: Vec<DefectReport>,
    pub raw_response: String,
    pub token_usage: (u64, u64),
    /// Wall-clock seconds; left out of serialized output so reruns compare
    /// byte for byte.
    #[serde(skip)]
    pub latency: f64,
    /// Unreadable findings plus findings outside the file.
    pub anomalies: usize,
}

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("transport error: {0}")]
    TransportError(String),
    #[error("authentication failed: {0}")]
    AuthError(String),
    #[error("response contained no parseable findings and no {NO_DEFECTS} marker")]
    ParseFallbackExhausted { raw: String },
    #[error("replay fixture: {0}")]
    Replay(String),
    #[error("invalid detector config: {0}")]
    Config(String),
}

pub trait Detector: Send + Sync {
    fn name(&self) -> &str;

    fn respond(&self, src: &SourceUnit, prompt: &LogicTreePrompt) -> Result<RawResponse, DetectError>;
}

pub fn detect(detector: &dyn Detector, src: &SourceUnit, prompt: &LogicTreePrompt) -> Result<DetectionOutcome, DetectError> {
    let start = Instant::now();
    let raw = detector.respond(src, prompt)?;
    let latency = start.elapsed().as_secs_f64();
    let parsed = parse_output(&raw.text);
    if parsed.exhausted() {
        return Err(DetectError::ParseFallbackExhausted { raw: raw.text });
    }
    let mut anomalies = parsed.anomalies;
    let total = parsed.reports.len();
    let in_range: Vec<DefectReport> = parsed
        .reports
        .into_iter()
        .filter(|r| r.line >= 1 && r.line <= src.line_count())
        .collect();
    anomalies += total - in_range.len();
    Ok(DetectionOutcome {
        dut_id: src.id().to_string(),
        reports: merge_reports(in_range),
        raw_response: raw.text,
        token_usage: (raw.input_tokens, raw.output_tokens),
        latency,
        anomalies,
    })
}

/// Detection results for a whole benchmark, as written by `lintllm detect`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSet {
    pub tool: String,
    pub outcomes: Vec<DetectionOutcome>,
    /// DUTs whose detection failed, with the error text.
    #[serde(default)]
    pub failures: Vec<(String, String)>,
}

impl OutcomeSet {
    /// Reports per dut id; failed DUTs map to no reports.
    pub fn reports_by_dut(&self) -> std::collections::BTreeMap<String, Vec<DefectReport>> {
        let mut map: std::collections::BTreeMap<String, Vec<DefectReport>> =
            self.outcomes.iter().map(|o| (o.dut_id.clone(), o.reports.clone())).collect();
        for (dut, _) in &self.failures {
            map.entry(dut.clone()).or_default();
        }
        map
    }

    pub fn token_usage(&self) -> (u64, u64) {
        self.outcomes
            .iter()
            .fold((0, 0), |(i, o), x| (i + x.token_usage.0, o + x.token_usage.1))
    }
}

/// Runs `detector` over every source on up to `max_parallel` threads.
pub fn detect_all(detector: &dyn Detector, sources: &[SourceUnit], prompt: &LogicTreePrompt, max_parallel: usize) -> OutcomeSet {
    let results = crate::parallel::par_map(sources, max_parallel, |_, src| detect(detector, src, prompt));
    let mut set = OutcomeSet {
        tool: detector.name().to_string(),
        outcomes: Vec::new(),
        failures: Vec::new(),
    };
    for (src, r) in sources.iter().zip(results) {
        match r {
            Ok(o) => set.outcomes.push(o),
            Err(e) => set.failures.push((src.id().to_string(), e.to_string())),
        }
    }
    set
}

/// Builds the backend named by `cfg`. The LLM backend reads
/// `LINTLLM_API_KEY` and `LINTLLM_API_BASE`.
pub fn build_detector(cfg: &DetectorConfig) -> Result<Box<dyn Detector>, DetectError> {
    cfg.validate()?;
    Ok(match cfg.backend {
        Backend::Baseline => Box::new(BaselineDetector),
        Backend::Replay => {
            let path = cfg.fixture.as_ref().expect("validated");
            Box::new(ReplayDetector::load(path)?)
        }
        Backend::Llm => Box::new(LlmDetector::from_env(cfg.clone())?),
    })
}
