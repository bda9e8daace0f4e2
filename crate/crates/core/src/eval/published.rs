//! Published per-DUT results and their headline rates.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{aggregate, difficulty_of, DutScore, EvalError, EvalSummary};

/// Per-tool, per-DUT cells: `tool_id,tool_name,dut_id,correct,false_positives`.
pub const PUBLISHED_CELLS: &str = include_str!("../../data/fixtures/published_cells.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedRow {
    pub tool_id: u8,
    pub tool: &'static str,
    pub cr: f64,
    pub fr: f64,
}

/// Headline rates: the two EDA tools and each LLM with the full framework.
pub fn published_rates() -> [PublishedRow; 7] {
    [
        PublishedRow { tool_id: 1, tool: "Commercial EDA", cr: 64.44, fr: 27.78 },
        PublishedRow { tool_id: 2, tool: "Verilator", cr: 62.22, fr: 32.22 },
        PublishedRow { tool_id: 3, tool: "Llama-3.1 +LintLLM", cr: 68.89, fr: 31.11 },
        PublishedRow { tool_id: 4, tool: "DeepSeek V2.5 +LintLLM", cr: 81.11, fr: 18.89 },
        PublishedRow { tool_id: 5, tool: "GPT-4 +LintLLM", cr: 66.67, fr: 33.33 },
        PublishedRow { tool_id: 6, tool: "GPT-4o +LintLLM", cr: 73.33, fr: 26.67 },
        PublishedRow { tool_id: 7, tool: "o1-mini +LintLLM", cr: 83.33, fr: 12.22 },
    ]
}

#[derive(Debug, Deserialize)]
struct Cell {
    tool_id: u8,
    tool_name: String,
    dut_id: String,
    correct: u8,
    false_positives: usize,
}

/// Per-tool cells, keyed by tool id, in file order.
pub fn parse_cells(csv_text: &str) -> Result<BTreeMap<u8, (String, Vec<DutScore>)>, EvalError> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let mut tools: BTreeMap<u8, (String, Vec<DutScore>)> = BTreeMap::new();
    for (i, rec) in rdr.deserialize::<Cell>().enumerate() {
        let line = i + 2;
        let cell = rec.map_err(|e| EvalError::FixtureParseError { line, reason: e.to_string() })?;
        if cell.correct > 1 {
            return Err(EvalError::FixtureParseError {
                line,
                reason: format!("correct must be 0 or 1, got {}", cell.correct),
            });
        }
        let difficulty = difficulty_of(&cell.dut_id).ok_or_else(|| EvalError::FixtureParseError {
            line,
            reason: format!("dut id `{}` has no tier prefix", cell.dut_id),
        })?;
        let (name, scores) = tools.entry(cell.tool_id).or_insert_with(|| (cell.tool_name.clone(), Vec::new()));
        if *name != cell.tool_name {
            return Err(EvalError::FixtureParseError {
                line,
                reason: format!("tool {} named both `{name}` and `{}`", cell.tool_id, cell.tool_name),
            });
        }
        if scores.iter().any(|s| s.dut_id == cell.dut_id) {
            return Err(EvalError::FixtureParseError {
                line,
                reason: format!("duplicate cell for {} / {}", cell.tool_id, cell.dut_id),
            });
        }
        scores.push(DutScore {
            dut_id: cell.dut_id,
            difficulty: Some(difficulty),
            correct: cell.correct == 1,
            false_positives: cell.false_positives,
        });
    }
    Ok(tools)
}

/// One summary per tool, in tool-id order.
pub fn replay_published(csv_text: &str) -> Result<Vec<EvalSummary>, EvalError> {
    parse_cells(csv_text)?
        .values()
        .map(|(name, scores)| aggregate(name, scores))
        .collect()
}
