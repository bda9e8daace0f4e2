//! Scoring detection outcomes against benchmark ground truth.

pub mod cost;
pub mod published;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{BenchmarkEntry, Difficulty};
use crate::detector::DefectReport;

pub use cost::{CostModel, CostReport};
pub use published::{parse_cells, published_rates, replay_published, PublishedRow, PUBLISHED_CELLS};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("outcome for {outcome} scored against entry {entry}")]
    DutMismatch { entry: String, outcome: String },
    #[error("no scores to aggregate")]
    EmptyScores,
    #[error("fixture line {line}: {reason}")]
    FixtureParseError { line: usize, reason: String },
    #[error("unsupported report format `{0}` (table-text, csv, markdown)")]
    UnsupportedFormat(String),
    #[error("no outcome for {0}")]
    MissingOutcome(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// How reports on the non-primary lines of a multi-line injection count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinePolicy {
    /// Neither correct nor false positive.
    #[default]
    Neutral,
    /// False positives.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DutScore {
    pub dut_id: String,
    pub difficulty: Option<Difficulty>,
    pub correct: bool,
    pub false_positives: usize,
}

pub fn difficulty_of(dut_id: &str) -> Option<Difficulty> {
    let p = dut_id.chars().next()?;
    Difficulty::ALL.into_iter().find(|d| d.prefix() == p)
}

/// Scores one DUT. Several reports on the same line count once.
pub fn score_dut(entry: &BenchmarkEntry, dut_id: &str, reports: &[DefectReport], policy: LinePolicy) -> Result<DutScore, EvalError> {
    if dut_id != entry.dut_id {
        return Err(EvalError::DutMismatch {
            entry: entry.dut_id.clone(),
            outcome: dut_id.to_string(),
        });
    }
    let rec = &entry.defect;
    let lines: BTreeSet<usize> = reports.iter().map(|r| r.line).collect();
    let correct = lines.contains(&rec.injected_line);
    let false_positives = lines
        .iter()
        .filter(|&&l| l != rec.injected_line)
        .filter(|&&l| policy == LinePolicy::Strict || !rec.touches(l))
        .count();
    Ok(DutScore {
        dut_id: entry.dut_id.clone(),
        difficulty: Some(entry.difficulty),
        correct,
        false_positives,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierCounts {
    pub n: usize,
    pub correct: usize,
    pub false_positives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub tool: String,
    pub n: usize,
    pub correct: usize,
    pub false_positives: usize,
    /// Percent, two decimals.
    pub cr: f64,
    pub fr: f64,
    pub per_difficulty: BTreeMap<Difficulty, TierCounts>,
}

/// `100 * num / den` rounded half-up to two decimals.
pub fn percent(num: usize, den: usize) -> f64 {
    assert!(den > 0, "percent of an empty set");
    let (num, den) = (num as u128, den as u128);
    let hundredths = (num * 20_000 + den) / (2 * den);
    hundredths as f64 / 100.0
}

pub fn aggregate(tool: &str, scores: &[DutScore]) -> Result<EvalSummary, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptyScores);
    }
    let correct = scores.iter().filter(|s| s.correct).count();
    let false_positives: usize = scores.iter().map(|s| s.false_positives).sum();
    let mut per_difficulty: BTreeMap<Difficulty, TierCounts> = BTreeMap::new();
    for s in scores {
        if let Some(d) = s.difficulty {
            let t = per_difficulty.entry(d).or_default();
            t.n += 1;
            t.correct += usize::from(s.correct);
            t.false_positives += s.false_positives;
        }
    }
    Ok(EvalSummary {
        tool: tool.to_string(),
        n: scores.len(),
        correct,
        false_positives,
        cr: percent(correct, scores.len()),
        fr: percent(false_positives, scores.len()),
        per_difficulty,
    })
}

/// Scores every manifest entry. `reports` maps dut id to that DUT's reports.
pub fn evaluate(
    tool: &str,
    entries: &[BenchmarkEntry],
    reports: &BTreeMap<String, Vec<DefectReport>>,
    policy: LinePolicy,
) -> Result<(EvalSummary, Vec<DutScore>), EvalError> {
    let scores = entries
        .iter()
        .map(|e| {
            let r = reports.get(&e.dut_id).ok_or_else(|| EvalError::MissingOutcome(e.dut_id.clone()))?;
            score_dut(e, &e.dut_id, r, policy)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((aggregate(tool, &scores)?, scores))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    TableText,
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table-text" | "text" => Ok(ReportFormat::TableText),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(EvalError::UnsupportedFormat(other.to_string())),
        }
    }
}

fn tier_header() -> Vec<String> {
    Difficulty::ALL
        .iter()
        .flat_map(|d| [format!("{d} C"), format!("{d} F")])
        .collect()
}

fn row(s: &EvalSummary) -> Vec<String> {
    let mut cells = vec![s.tool.clone(), format!("{:.2}", s.cr), format!("{:.2}", s.fr)];
    for d in Difficulty::ALL {
        let t = s.per_difficulty.get(&d).copied().unwrap_or_default();
        cells.push(format!("{}/{}", t.correct, t.n));
        cells.push(t.false_positives.to_string());
    }
    cells
}

pub fn render_report(summaries: &[EvalSummary], format: ReportFormat) -> Result<String, EvalError> {
    if summaries.is_empty() {
        return Err(EvalError::EmptyScores);
    }
    let mut header = vec!["tool".to_string(), "CR %".to_string(), "FR %".to_string()];
    header.extend(tier_header());
    let rows: Vec<Vec<String>> = summaries.iter().map(row).collect();
    Ok(match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().quote_style(csv::QuoteStyle::Necessary).from_writer(Vec::new());
            w.write_record(&header)?;
            for r in &rows {
                w.write_record(r)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| EvalError::Csv(e.into_error().into()))?).expect("csv output is utf-8")
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let align: Vec<&str> = header.iter().enumerate().map(|(i, _)| if i == 0 { ":---" } else { "---:" }).collect();
            let _ = writeln!(out, "| {} |", align.join(" | "));
            for r in &rows {
                let _ = writeln!(out, "| {} |", r.join(" | "));
            }
            out
        }
        ReportFormat::TableText => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for r in &rows {
                for (w, c) in widths.iter_mut().zip(r) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |cells: &[String]| -> String {
                let parts: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                    .collect();
                parts.join("  ").trim_end().to_string()
            };
            let mut out = line(&header);
            out.push('\n');
            let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
            for r in &rows {
                out.push_str(&line(r));
                out.push('\n');
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::Category;
    use crate::mutation::DefectRecord;
    use proptest::prelude::*;

    fn entry(id: &str, injected: usize, touched: (usize, usize)) -> BenchmarkEntry {
        BenchmarkEntry {
            dut_id: id.into(),
            difficulty: difficulty_of(id).unwrap(),
            category: Category::BitWidthUsage,
            source_file: "x.v".into(),
            complexity: 0,
            original_path: String::new(),
            original_sha256: String::new(),
            mutated_path: String::new(),
            mutated_sha256: String::new(),
            defect: DefectRecord {
                dut_id: id.into(),
                rule_id: 6,
                category: Category::BitWidthUsage,
                injected_line: injected,
                touched_lines: touched,
                original_snippet: String::new(),
                mutated_snippet: String::new(),
                seed: 0,
            },
            extra: BTreeMap::new(),
        }
    }

    fn reports(lines: &[usize]) -> Vec<DefectReport> {
        lines.iter().map(|&l| DefectReport::new(l, Category::Operators, "r")).collect()
    }

    fn score(lines: &[usize]) -> DutScore {
        score_dut(&entry("c01", 6, (6, 6)), "c01", &reports(lines), LinePolicy::Neutral).unwrap()
    }

    #[test]
    fn scoring_cases() {
        assert_eq!((score(&[6]).correct, score(&[6]).false_positives), (true, 0));
        assert_eq!((score(&[9]).correct, score(&[9]).false_positives), (false, 1));
        assert_eq!((score(&[6, 20, 21]).correct, score(&[6, 20, 21]).false_positives), (true, 2));
        assert_eq!(score(&[9, 9, 9]).false_positives, 1);
        assert!(score_dut(&entry("c01", 6, (6, 6)), "c02", &[], LinePolicy::Neutral).is_err());
    }

    #[test]
    fn secondary_lines_policy() {
        let e = entry("m01", 5, (4, 6));
        let s = score_dut(&e, "m01", &reports(&[4, 5, 6, 9]), LinePolicy::Neutral).unwrap();
        assert_eq!((s.correct, s.false_positives), (true, 1));
        let s = score_dut(&e, "m01", &reports(&[4, 5, 6, 9]), LinePolicy::Strict).unwrap();
        assert_eq!(s.false_positives, 3);
    }

    #[test]
    fn percent_rounding() {
        assert_eq!(percent(58, 90), 64.44);
        assert_eq!(percent(25, 90), 27.78);
        assert_eq!(percent(75, 90), 83.33);
        assert_eq!(percent(11, 90), 12.22);
        assert_eq!(percent(1, 8), 12.5);
        // 1/800 = 0.125% rounds half up
        assert_eq!(percent(1, 800), 0.13);
        assert_eq!(percent(0, 3), 0.0);
    }

    #[test]
    fn empty_aggregate() {
        assert!(matches!(aggregate("t", &[]), Err(EvalError::EmptyScores)));
    }

    #[test]
    fn perfect_outcomes() {
        let entries = [entry("s01", 3, (3, 3)), entry("m01", 7, (6, 8))];
        let map: BTreeMap<String, Vec<DefectReport>> = entries
            .iter()
            .map(|e| (e.dut_id.clone(), reports(&[e.defect.injected_line])))
            .collect();
        let (s, _) = evaluate("t", &entries, &map, LinePolicy::Neutral).unwrap();
        assert_eq!((s.cr, s.fr), (100.0, 0.0));
        assert_eq!(s.per_difficulty[&Difficulty::Medium].correct, 1);
    }

    #[test]
    fn formats() {
        let s = aggregate("tool, \"quoted\"", &[score(&[6]), score(&[9])]).unwrap();
        let csv_text = render_report(&[s.clone(), s.clone()], ReportFormat::Csv).unwrap();
        let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
        let recs: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(recs.len(), 2);
        assert_eq!(&recs[0][0], "tool, \"quoted\"");
        assert_eq!(&recs[0][1], "50.00");
        let md = render_report(std::slice::from_ref(&s), ReportFormat::Markdown).unwrap();
        assert_eq!(md.lines().count(), 3);
        let txt = render_report(&[s], ReportFormat::TableText).unwrap();
        assert!(txt.lines().nth(2).unwrap().contains("50.00"));
        assert!("pdf".parse::<ReportFormat>().is_err());
    }

    proptest! {
        #[test]
        fn aggregate_is_order_independent(cells in prop::collection::vec((any::<bool>(), 0usize..4), 1..60), rot in 0usize..60) {
            let scores: Vec<DutScore> = cells
                .iter()
                .enumerate()
                .map(|(i, &(c, f))| DutScore { dut_id: format!("s{i:02}"), difficulty: Some(Difficulty::Simple), correct: c, false_positives: f })
                .collect();
            let mut rotated = scores.clone();
            rotated.rotate_left(rot % scores.len());
            rotated.reverse();
            let a = aggregate("t", &scores).unwrap();
            let b = aggregate("t", &rotated).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!((0.0..=100.0).contains(&a.cr));
            prop_assert!(a.fr >= 0.0);
            let oracle = (a.correct as f64 * 100.0 / scores.len() as f64 * 100.0).round() / 100.0;
            prop_assert!((a.cr - oracle).abs() < 0.006);
        }
    }
}
