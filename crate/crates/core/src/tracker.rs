//! Main-defect tracking.
//!
//! A single root defect often drags several secondary reports along with it.
//! For every reported line the tracker applies a candidate fix, runs the
//! detector again and counts what is left. The line whose fix leaves the
//! fewest remaining defects is the main defect.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detector::{detect, DefectReport, DetectError, DetectionOutcome, Detector};
use crate::mutation::{invert_mutation, DefectRecord};
use crate::parallel::par_map;
use crate::prompt::LogicTreePrompt;
use crate::source::SourceUnit;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixStrategy {
    /// Replace the line with the report's suggested fix.
    ReportFix,
    /// Undo the injected mutation when the line lies inside it.
    OracleInvert(DefectRecord),
    /// Empty the line, keeping line numbering intact.
    LineBlank,
}

impl FixStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            FixStrategy::ReportFix => "report-fix",
            FixStrategy::OracleInvert(_) => "oracle",
            FixStrategy::LineBlank => "line-blank",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixError {
    #[error("strategy {strategy} has no fix for line {line}")]
    NoFixAvailable { strategy: &'static str, line: usize },
}

/// Applies one strategy to the reported line.
pub fn apply_fix(src: &SourceUnit, report: &DefectReport, strategy: &FixStrategy) -> Result<SourceUnit, FixError> {
    let line = report.line;
    let none = || FixError::NoFixAvailable {
        strategy: strategy.name(),
        line,
    };
    let current = src.line(line).ok_or_else(none)?;
    match strategy {
        FixStrategy::ReportFix => {
            let fix = report.suggested_fix.as_deref().filter(|f| !f.trim().is_empty()).ok_or_else(none)?;
            if fix == current || fix.contains('\n') {
                return Err(none());
            }
            Ok(replace_line(src, line, fix))
        }
        FixStrategy::OracleInvert(rec) => {
            let anchor = rec.is_insert() && line == rec.touched_lines.0;
            if !rec.touches(line) || anchor {
                return Err(none());
            }
            invert_mutation(src, rec).map_err(|_| none())
        }
        FixStrategy::LineBlank => {
            if current.trim().is_empty() {
                return Err(none());
            }
            Ok(replace_line(src, line, ""))
        }
    }
}

fn replace_line(src: &SourceUnit, line: usize, text: &str) -> SourceUnit {
    let mut lines: Vec<&str> = src.lines().collect();
    lines[line - 1] = text;
    src.from_lines(&lines)
}

/// Defects left after a trial fix. A failed re-detection counts as worse
/// than any number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Remaining {
    Count(usize),
    Failed,
}

impl Remaining {
    pub fn count(self) -> Option<usize> {
        match self {
            Remaining::Count(n) => Some(n),
            Remaining::Failed => None,
        }
    }
}

impl std::fmt::Display for Remaining {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Remaining::Count(n) => write!(f, "{n}"),
            Remaining::Failed => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub line: usize,
    /// Strategy that produced the fix, `None` when none applied.
    pub strategy: Option<String>,
    pub remaining: Remaining,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct TrackConfig {
    /// Tried in order until one yields a fix.
    pub strategies: Vec<FixStrategy>,
    pub max_parallel: usize,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            strategies: vec![FixStrategy::ReportFix, FixStrategy::LineBlank],
            max_parallel: 4,
        }
    }
}

impl TrackConfig {
    /// Fixes with ground truth first, blanking the rest.
    pub fn oracle(record: DefectRecord) -> Self {
        Self {
            strategies: vec![FixStrategy::OracleInvert(record), FixStrategy::LineBlank],
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackResult {
    pub dut_id: String,
    /// `None` when the first detection reported nothing.
    pub main_defect: Option<DefectReport>,
    pub initial: DetectionOutcome,
    /// One trial per distinct reported line, in line order.
    pub trials: Vec<Trial>,
    pub detector_calls: usize,
}

impl TrackResult {
    pub fn main_line(&self) -> Option<usize> {
        self.main_defect.as_ref().map(|r| r.line)
    }

    pub fn remaining(&self) -> Vec<Remaining> {
        self.trials.iter().map(|t| t.remaining).collect()
    }
}

#[derive(Debug, Error)]
pub enum TrackError {
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error("every trial fix failed for {dut_id}")]
    TrackingFailed { dut_id: String, trials: Vec<Trial> },
}

fn distinct_lines(reports: &[DefectReport]) -> usize {
    let mut lines: Vec<usize> = reports.iter().map(|r| r.line).collect();
    lines.dedup();
    lines.len()
}

fn run_trial(detector: &dyn Detector, src: &SourceUnit, prompt: &LogicTreePrompt, report: &DefectReport, cfg: &TrackConfig) -> Trial {
    let mut last_err = None;
    for strategy in &cfg.strategies {
        match apply_fix(src, report, strategy) {
            Ok(fixed) => {
                let (remaining, error) = match detect(detector, &fixed, prompt) {
                    Ok(out) => (Remaining::Count(distinct_lines(&out.reports)), None),
                    Err(e) => (Remaining::Failed, Some(e.to_string())),
                };
                return Trial {
                    line: report.line,
                    strategy: Some(strategy.name().to_string()),
                    remaining,
                    error,
                };
            }
            Err(e) => last_err = Some(e.to_string()),
        }
    }
    Trial {
        line: report.line,
        strategy: None,
        remaining: Remaining::Failed,
        error: last_err,
    }
}

/// Runs detection once, then one trial per reported line.
pub fn track_main_defect(
    detector: &dyn Detector,
    src: &SourceUnit,
    prompt: &LogicTreePrompt,
    cfg: &TrackConfig,
) -> Result<TrackResult, TrackError> {
    let initial = detect(detector, src, prompt)?;
    // one candidate per line: the first report on it
    let mut candidates: Vec<&DefectReport> = Vec::new();
    for r in &initial.reports {
        if candidates.last().is_none_or(|c| c.line != r.line) {
            candidates.push(r);
        }
    }
    let trials = par_map(&candidates, cfg.max_parallel, |_, r| run_trial(detector, src, prompt, r, cfg));
    let detector_calls = 1 + trials.iter().filter(|t| t.strategy.is_some()).count();
    if candidates.is_empty() {
        return Ok(TrackResult {
            dut_id: src.id().to_string(),
            main_defect: None,
            initial,
            trials,
            detector_calls,
        });
    }
    if trials.iter().all(|t| t.remaining == Remaining::Failed) {
        return Err(TrackError::TrackingFailed {
            dut_id: src.id().to_string(),
            trials,
        });
    }
    // candidates are already in line order, so min_by_key keeps the smallest line on ties
    let best = (0..trials.len()).min_by_key(|&i| (trials[i].remaining, trials[i].line, i)).unwrap();
    Ok(TrackResult {
        dut_id: src.id().to_string(),
        main_defect: Some(candidates[best].clone()),
        initial,
        trials,
        detector_calls,
    })
}
