use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DetectError, Detector, RawResponse};
use crate::prompt::LogicTreePrompt;
use crate::source::SourceUnit;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayResponse {
    pub dut_id: String,
    /// Digest of the file the response was recorded against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    pub raw: String,
    #[serde(default)]
    pub input_tokens: u64,
    #[serde(default)]
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayFixture {
    pub tool: String,
    pub responses: Vec<ReplayResponse>,
}

/// Serves stored responses keyed by dut id.
#[derive(Debug, Clone)]
pub struct ReplayDetector {
    tool: String,
    by_dut: BTreeMap<String, ReplayResponse>,
}

impl ReplayDetector {
    pub fn new(fixture: ReplayFixture) -> Self {
        Self {
            tool: fixture.tool,
            by_dut: fixture
                .responses
                .into_iter()
                .map(|r| (r.dut_id.clone(), r))
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, DetectError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DetectError::Replay(format!("{}: {e}", path.display())))?;
        let fixture: ReplayFixture = serde_json::from_str(&text)
            .map_err(|e| DetectError::Replay(format!("{}: {e}", path.display())))?;
        Ok(Self::new(fixture))
    }
}

impl Detector for ReplayDetector {
    fn name(&self) -> &str {
        &self.tool
    }

    fn respond(&self, src: &SourceUnit, _: &LogicTreePrompt) -> Result<RawResponse, DetectError> {
        let r = self
            .by_dut
            .get(src.id())
            .ok_or_else(|| DetectError::Replay(format!("no stored response for {}", src.id())))?;
        if let Some(d) = &r.sha256 {
            if d != src.sha256() {
                return Err(DetectError::Replay(format!(
                    "response for {} was recorded against a different file",
                    src.id()
                )));
            }
        }
        Ok(RawResponse {
            text: r.raw.clone(),
            input_tokens: r.input_tokens,
            output_tokens: r.output_tokens,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::detect;
    use crate::prompt::build_default_lint_prompt;

    fn fixture(sha: Option<String>) -> ReplayFixture {
        ReplayFixture {
            tool: "t".into(),
            responses: vec![ReplayResponse {
                dut_id: "s01".into(),
                sha256: sha,
                raw: "DEFECT line=2 type=Operators reason=r".into(),
                input_tokens: 5,
                output_tokens: 1,
            }],
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let src = SourceUnit::new("s01", "s01.v", "a\nb\n");
        let d = ReplayDetector::new(fixture(Some(src.sha256().to_string())));
        let p = build_default_lint_prompt();
        let a = detect(&d, &src, &p).unwrap();
        let b = detect(&d, &src, &p).unwrap();
        assert_eq!(a.reports, b.reports);
        assert_eq!(a.raw_response, b.raw_response);
        assert_eq!(a.reports[0].line, 2);
    }

    #[test]
    fn digest_and_missing_dut() {
        let p = build_default_lint_prompt();
        let d = ReplayDetector::new(fixture(Some("0".repeat(64))));
        assert!(d.respond(&SourceUnit::new("s01", "x", "a"), &p).is_err());
        let d = ReplayDetector::new(fixture(None));
        assert!(d.respond(&SourceUnit::new("s02", "x", "a"), &p).is_err());
        assert!(d.respond(&SourceUnit::new("s01", "x", "a"), &p).is_ok());
    }
}
