//! Chat-completion client.
//!
//! One request per detection: the rendered prompt as the system message and
//! the line-numbered source as the user message.

use std::time::Duration;

use serde_json::{json, Value};

use super::{temperature_supported, DetectError, Detector, DetectorConfig, RawResponse};
use crate::prompt::LogicTreePrompt;
use crate::source::SourceUnit;

pub const DEFAULT_API_BASE: &str = "https://api.openai.com/v1";

/// Sends one JSON POST and returns (status, body). Errors are connection
/// level failures.
pub trait ChatTransport: Send + Sync {
    fn post_json(&self, url: &str, api_key: &str, body: &Value, timeout: Duration) -> Result<(u16, String), String>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Result<Self, DetectError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| DetectError::TransportError(e.to_string()))?;
        Ok(Self { client })
    }
}

impl ChatTransport for ReqwestTransport {
    fn post_json(&self, url: &str, api_key: &str, body: &Value, timeout: Duration) -> Result<(u16, String), String> {
        let resp = self
            .client
            .post(url)
            .bearer_auth(api_key)
            .timeout(timeout)
            .json(body)
            .send()
            .map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let text = resp.text().map_err(|e| e.to_string())?;
        Ok((status, text))
    }
}

pub struct LlmDetector {
    cfg: DetectorConfig,
    api_base: String,
    api_key: String,
    transport: Box<dyn ChatTransport>,
}

impl LlmDetector {
    pub fn new(cfg: DetectorConfig, api_base: impl Into<String>, api_key: impl Into<String>, transport: Box<dyn ChatTransport>) -> Self {
        Self {
            cfg,
            api_base: api_base.into(),
            api_key: api_key.into(),
            transport,
        }
    }

    pub fn from_env(cfg: DetectorConfig) -> Result<Self, DetectError> {
        let api_key = std::env::var("LINTLLM_API_KEY")
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| DetectError::AuthError("LINTLLM_API_KEY is not set".into()))?;
        let api_base = cfg
            .endpoint
            .clone()
            .or_else(|| std::env::var("LINTLLM_API_BASE").ok())
            .unwrap_or_else(|| DEFAULT_API_BASE.to_string());
        Ok(Self::new(cfg, api_base, api_key, Box::new(ReqwestTransport::new()?)))
    }

    pub fn request_body(&self, src: &SourceUnit, prompt: &LogicTreePrompt) -> Value {
        let mut body = json!({
            "model": self.cfg.model_id,
            "messages": [
                {"role": "system", "content": prompt.render()},
                {"role": "user", "content": src.numbered()},
            ],
        });
        if temperature_supported(&self.cfg.model_id) {
            body["temperature"] = json!(self.cfg.temperature);
        }
        body
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.api_base.trim_end_matches('/'))
    }
}

fn parse_completion(body: &str) -> Result<RawResponse, DetectError> {
    let v: Value = serde_json::from_str(body).map_err(|e| DetectError::TransportError(format!("malformed response: {e}")))?;
    let text = v["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| DetectError::TransportError("response has no choices[0].message.content".into()))?;
    Ok(RawResponse {
        text: text.to_string(),
        input_tokens: v["usage"]["prompt_tokens"].as_u64().unwrap_or(0),
        output_tokens: v["usage"]["completion_tokens"].as_u64().unwrap_or(0),
    })
}

impl Detector for LlmDetector {
    fn name(&self) -> &str {
        &self.cfg.model_id
    }

    fn respond(&self, src: &SourceUnit, prompt: &LogicTreePrompt) -> Result<RawResponse, DetectError> {
        let body = self.request_body(src, prompt);
        let url = self.url();
        let timeout = Duration::from_secs(self.cfg.timeout_secs.max(1));
        let mut last = String::new();
        for attempt in 0..=self.cfg.retry_budget {
            if attempt > 0 {
                let delay = self.cfg.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                std::thread::sleep(Duration::from_millis(delay));
            }
            match self.transport.post_json(&url, &self.api_key, &body, timeout) {
                Err(e) => last = e,
                Ok((401 | 403, text)) => return Err(DetectError::AuthError(text)),
                Ok((200..=299, text)) => return parse_completion(&text),
                Ok((status @ (429 | 500..=599), text)) => last = format!("HTTP {status}: {text}"),
                Ok((status, text)) => return Err(DetectError::TransportError(format!("HTTP {status}: {text}"))),
            }
        }
        Err(DetectError::TransportError(format!(
            "gave up after {} attempts: {last}",
            self.cfg.retry_budget + 1
        )))
    }
}
